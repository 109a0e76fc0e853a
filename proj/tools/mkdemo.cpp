// Writes a small synthetic dataset (curves.csv + responses.csv) for quick
// CLI experiments: mkdemo <dir> [n] [S] [seed] [scenario].
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "efr/csvio.hpp"
#include "efr/simulation.hpp"

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: mkdemo <dir> [n] [S] [seed] [scenario]\n";
        return 2;
    }
    efr::ScenarioConfig cfg;
    cfg.n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 80;
    cfg.S = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 50;
    cfg.seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1;
    cfg.scenario = argc > 5 ? argv[5][0] : 'A';
    try {
        efr::validate_config(cfg);
        std::filesystem::create_directories(argv[1]);
        auto draw = efr::gen_scenario(cfg, 0);
        const std::filesystem::path dir(argv[1]);
        efr::write_curves((dir / "curves.csv").string(), draw.sample);
        efr::write_responses((dir / "responses.csv").string(), draw.sample.ids,
                             draw.responses);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << "wrote curves.csv and responses.csv (n=" << cfg.n << ", S=" << cfg.S
              << ")\n";
    return 0;
}
