#include "doctest.h"
TEST_CASE("placeholder pharmonic") { CHECK(true); }
