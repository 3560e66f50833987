#pragma once

#include "vitalsforge/cli.hpp"
#include "vitalsforge/cohort.hpp"
#include "vitalsforge/cohort_io.hpp"
#include "vitalsforge/evaluation/experiment.hpp"
#include "vitalsforge/evaluation/metrics.hpp"
#include "vitalsforge/evaluation/report.hpp"
#include "vitalsforge/evaluation/splits.hpp"
#include "vitalsforge/features.hpp"
#include "vitalsforge/learners/model.hpp"
#include "vitalsforge/learners/model_io.hpp"
#include "vitalsforge/stats.hpp"
#include "vitalsforge/synth.hpp"
