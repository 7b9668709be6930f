#pragma once

#include "dsimp/compatibility.hpp"
#include "dsimp/errors.hpp"
#include "dsimp/io.hpp"
#include "dsimp/mesh.hpp"
#include "dsimp/metrics.hpp"
#include "dsimp/refine.hpp"
#include "dsimp/relabel.hpp"
