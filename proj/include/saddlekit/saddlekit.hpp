#pragma once

// Umbrella header for the whole library.

#include "core.hpp"
#include "parallel.hpp"
#include "mesh.hpp"
#include "target.hpp"
#include "convex.hpp"
#include "plmap.hpp"
#include "expr.hpp"
#include "generate.hpp"
#include "cut.hpp"
#include "energy.hpp"
#include "fiber.hpp"
#include "graph.hpp"
#include "io.hpp"
