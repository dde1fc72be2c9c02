#include "cpband/cli.hpp"

int main(int argc, char** argv) { return cpband::run_cli(argc, argv); }
