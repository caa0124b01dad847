#pragma once

#include "pmab/rational.hpp"
#include "pmab/noise.hpp"
#include "pmab/environment.hpp"
#include "pmab/spectral.hpp"
#include "pmab/policy.hpp"
#include "pmab/nested_cb.hpp"
#include "pmab/two_stage.hpp"
#include "pmab/elimination.hpp"
#include "pmab/ucb.hpp"
#include "pmab/policies.hpp"
#include "pmab/instance_io.hpp"
#include "pmab/harness.hpp"
