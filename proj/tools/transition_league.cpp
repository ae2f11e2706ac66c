#include "transition_league/cli.hpp"

int main(int argc, char** argv) { return tl::run_command(argc, argv); }
