#include <doctest.h>
#include "rydscape/model.hpp"
TEST_CASE("placeholder") { CHECK(rydscape::env_dim(2) == 9); }
