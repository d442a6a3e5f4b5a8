#include "rcm/lab/app.hpp"

int main(int argc, char** argv) { return rcm::lab::run_cli(argc, argv); }
