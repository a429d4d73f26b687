#include "heterosim/cli.hpp"

int main(int argc, char** argv) { return heterosim::main_entry(argc, argv); }
