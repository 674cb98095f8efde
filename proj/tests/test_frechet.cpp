#include <catch_amalgamated.hpp>
#include "test_helpers.hpp"
