#include "commands.hpp"

int main(int argc, char** argv) { return qcli::run_cli(argc, argv); }
