#include <doctest.h>
TEST_CASE("placeholder_test_explorer") { CHECK(true); }
