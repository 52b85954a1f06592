#pragma once

#include "analytics.hpp"
#include "config.hpp"
#include "date.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "exporter.hpp"
#include "fixture.hpp"
#include "geometry.hpp"
#include "ingest.hpp"
#include "layout.hpp"
#include "service.hpp"
#include "svg.hpp"
#include "temporal.hpp"
