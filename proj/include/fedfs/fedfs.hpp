#pragma once

#include "fedfs/bounds.hpp"
#include "fedfs/ce_optimizer.hpp"
#include "fedfs/datasets.hpp"
#include "fedfs/error.hpp"
#include "fedfs/federation.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/ks_test.hpp"
#include "fedfs/message.hpp"
#include "fedfs/metrics.hpp"
