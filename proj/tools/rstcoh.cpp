#include "rstcoh/cli.hpp"

int main(int argc, char** argv) { return rstcoh::cli::run(argc, argv); }
