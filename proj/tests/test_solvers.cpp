#include "doctest.h"
TEST_CASE("placeholder solvers") { CHECK(true); }
