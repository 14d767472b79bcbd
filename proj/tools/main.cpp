#include "qlap/cli.hpp"

int main(int argc, char** argv) { return qlap::run_cli(argc, argv); }
