#include "cspin/cli.hpp"

int main(int argc, char** argv) { return cspin::cli::run(argc, argv); }
