#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "cdiff/runtime.hpp"

int main(int argc, char** argv) {
  cdiff::tune_allocator();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
