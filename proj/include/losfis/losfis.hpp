#pragma once

#include "trapezoid.hpp"
#include "fis.hpp"
#include "dsl.hpp"
#include "los.hpp"
#include "pipeline.hpp"
