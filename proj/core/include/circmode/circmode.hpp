#pragma once

#include "circmode/angle.hpp"
#include "circmode/bands.hpp"
#include "circmode/circdist.hpp"
#include "circmode/emtest.hpp"
#include "circmode/error.hpp"
#include "circmode/ingest.hpp"
#include "circmode/kde.hpp"
#include "circmode/lrtest.hpp"
#include "circmode/parallel.hpp"
#include "circmode/report.hpp"
#include "circmode/rng.hpp"
#include "circmode/simlab.hpp"
