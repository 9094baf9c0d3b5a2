#pragma once

#include "osval/active.hpp"
#include "osval/bundle.hpp"
#include "osval/dataset.hpp"
#include "osval/error.hpp"
#include "osval/harness.hpp"
#include "osval/metrics.hpp"
#include "osval/random.hpp"
#include "osval/report.hpp"
#include "osval/svm.hpp"
#include "osval/sweep.hpp"
#include "osval/synth.hpp"
