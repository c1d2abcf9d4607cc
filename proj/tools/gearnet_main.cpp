#include "gearnet/cli.hpp"

int main(int argc, char** argv) { return gearnet::cli::run(argc, argv); }
