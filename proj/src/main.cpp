#include "efr/cli.hpp"

int main(int argc, char** argv) { return efr::cli::run(argc, argv); }
