// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "delaysim/delay_model.hpp"
#include "delaysim/ensemble.hpp"
#include "delaysim/error.hpp"
#include "delaysim/histogram.hpp"
#include "delaysim/metrics.hpp"
#include "delaysim/resource_plan.hpp"
#include "delaysim/simulate.hpp"
#include "delaysim/station.hpp"
#include "delaysim/stats.hpp"
#include "delaysim/table.hpp"
#include "delaysim/time.hpp"
#include "delaysim/timetable.hpp"
#include "delaysim/io/config_file.hpp"
#include "delaysim/io/ensemble_file.hpp"
#include "delaysim/io/table_export.hpp"
#include "delaysim/io/timetable_file.hpp"
