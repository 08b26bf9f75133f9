// treeproj_cli.cpp - command-line entry point
#include "treeproj/harness.hpp"

int main(int argc, char** argv) { return treeproj::run_cli(argc, argv); }
