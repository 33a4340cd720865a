#include <catch2/catch_amalgamated.hpp>

#include "slitforge/schedule.hpp"

using namespace slitforge;
