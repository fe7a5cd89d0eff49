#include "ocplmi/cli.hpp"

int main(int argc, char** argv) { return ocplmi::RunCli(argc, argv); }
