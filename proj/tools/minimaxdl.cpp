#include "minimaxdl/cli.hpp"

int main(int argc, char** argv) { return minimaxdl::cli::run(argc, argv); }
