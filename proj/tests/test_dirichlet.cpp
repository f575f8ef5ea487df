#include "doctest.h"
TEST_CASE("placeholder dirichlet") { CHECK(true); }
