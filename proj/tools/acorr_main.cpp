#include "acorr/cli.hpp"

int main(int argc, char** argv) { return acorr::cli::run(argc, argv); }
