#pragma once

#include "woven/constructions.hpp"
#include "woven/error.hpp"
#include "woven/frames.hpp"
#include "woven/generators.hpp"
#include "woven/linalg.hpp"
#include "woven/version.hpp"
#include "woven/weaving.hpp"
