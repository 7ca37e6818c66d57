#include "nonrad/cli.hpp"

int main(int argc, char** argv) { return nonrad::cli::run(argc, argv); }
