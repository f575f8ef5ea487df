#include "doctest.h"
TEST_CASE("placeholder whitney") { CHECK(true); }
