#include "slicegauss/cli.hpp"

int main(int argc, char** argv) { return slicegauss::cli::run(argc, argv); }
