#include <doctest.h>
TEST_CASE("placeholder_test_landscape") { CHECK(true); }
