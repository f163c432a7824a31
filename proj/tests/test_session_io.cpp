#include <doctest.h>
TEST_CASE("placeholder_test_session_io") { CHECK(true); }
