#include "doctest.h"
TEST_CASE("placeholder space") { CHECK(true); }
