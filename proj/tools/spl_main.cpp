#include "spl/cli.hpp"

int main(int argc, char** argv) { return spl::run_cli(argc, argv); }
