#pragma once

#include "framechange/error.hpp"
#include "framechange/text.hpp"
#include "framechange/corpus.hpp"
#include "framechange/parses.hpp"
#include "framechange/collect.hpp"
#include "framechange/divergence.hpp"
#include "framechange/change.hpp"
#include "framechange/report.hpp"
#include "framechange/pipeline.hpp"
