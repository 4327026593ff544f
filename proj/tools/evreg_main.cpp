#include "evreg/cli.hpp"

int main(int argc, char** argv) { return evreg::run_cli(argc, argv); }
