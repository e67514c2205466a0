#include "mobsim/cli.hpp"

int main(int argc, char** argv) { return mobsim::run_cli(argc, argv); }
