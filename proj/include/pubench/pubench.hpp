#pragma once

#include "pubench/classifier.hpp"
#include "pubench/csv.hpp"
#include "pubench/data.hpp"
#include "pubench/gaussian.hpp"
#include "pubench/gradcheck.hpp"
#include "pubench/loss.hpp"
#include "pubench/metrics.hpp"
#include "pubench/optimizer.hpp"
#include "pubench/risk.hpp"
#include "pubench/selection.hpp"
#include "pubench/train.hpp"
