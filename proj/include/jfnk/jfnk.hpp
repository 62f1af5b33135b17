#pragma once

#include "jfnk/dual.hpp"
#include "jfnk/grid.hpp"
#include "jfnk/harness.hpp"
#include "jfnk/jvp.hpp"
#include "jfnk/krylov.hpp"
#include "jfnk/linear_operator.hpp"
#include "jfnk/newton.hpp"
#include "jfnk/numerics.hpp"
#include "jfnk/problems/burgers.hpp"
#include "jfnk/problems/maxwell_kerr.hpp"
#include "jfnk/problems/reaction_diffusion.hpp"
#include "jfnk/problems/su_olson.hpp"
#include "jfnk/profiles.hpp"
