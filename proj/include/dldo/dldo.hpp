#pragma once

#include "dldo/analysis.hpp"
#include "dldo/artifacts.hpp"
#include "dldo/config_file.hpp"
#include "dldo/controller.hpp"
#include "dldo/engine.hpp"
#include "dldo/error.hpp"
#include "dldo/plant.hpp"
#include "dldo/thermometer_code.hpp"
