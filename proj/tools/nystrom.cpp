#include "nykrls/commands.hpp"

int main(int argc, char** argv) { return nykrls::run_cli(argc, argv); }
