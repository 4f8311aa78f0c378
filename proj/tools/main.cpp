#include "cli.hpp"

int main(int argc, char** argv) { return pvmark::cli::run(argc, argv); }
