#include <doctest.h>
TEST_CASE("placeholder_test_propagator") { CHECK(true); }
