#include "qconf/lab.hpp"

int main(int argc, char** argv) { return qconf::lab::main_entry(argc, argv); }
