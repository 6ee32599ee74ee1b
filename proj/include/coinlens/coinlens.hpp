#pragma once

#include "coinlens/backtest.hpp"
#include "coinlens/cohorts.hpp"
#include "coinlens/csv.hpp"
#include "coinlens/ingest.hpp"
#include "coinlens/manifest.hpp"
#include "coinlens/oracle.hpp"
#include "coinlens/replay.hpp"
#include "coinlens/synth.hpp"
#include "coinlens/time.hpp"
#include "coinlens/types.hpp"
#include "coinlens/valuation.hpp"
#include "coinlens/version.hpp"
