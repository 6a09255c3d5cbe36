#pragma once

// Umbrella header.
#include "ccp/analytics.hpp"
#include "ccp/classifier.hpp"
#include "ccp/commit.hpp"
#include "ccp/error.hpp"
#include "ccp/estimator.hpp"
#include "ccp/ingestion.hpp"
#include "ccp/json_io.hpp"
#include "ccp/stats.hpp"
#include "ccp/version.hpp"
