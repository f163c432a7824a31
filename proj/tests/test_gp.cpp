#include <doctest.h>
TEST_CASE("placeholder_test_gp") { CHECK(true); }
