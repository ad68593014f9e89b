#pragma once

#include "hpf/errors.hpp"
#include "hpf/geometry.hpp"
#include "hpf/io/config.hpp"
#include "hpf/io/plot.hpp"
#include "hpf/io/report.hpp"
#include "hpf/io/trace_file.hpp"
#include "hpf/metrics.hpp"
#include "hpf/monitor.hpp"
#include "hpf/rng.hpp"
#include "hpf/safety_field.hpp"
#include "hpf/scenario.hpp"
#include "hpf/simulation.hpp"
#include "hpf/trace.hpp"
#include "hpf/vec3.hpp"
