#pragma once

#include "lave/error.hpp"
#include "lave/types.hpp"
#include "lave/jsonl.hpp"
#include "lave/normalize.hpp"

#include "lave/metrics/vqa_accuracy.hpp"
#include "lave/metrics/meteor.hpp"
#include "lave/metrics/embedding.hpp"

#include "lave/llm/backend.hpp"
#include "lave/llm/replay.hpp"
#include "lave/llm/http_backend.hpp"
#include "lave/llm/cache.hpp"

#include "lave/judge/rating.hpp"
#include "lave/judge/prompt.hpp"
#include "lave/judge/lave.hpp"

#include "lave/stats/human.hpp"
#include "lave/stats/correlation.hpp"
#include "lave/stats/krippendorff.hpp"
#include "lave/stats/bootstrap.hpp"

#include "lave/report/failures.hpp"
#include "lave/report/category_means.hpp"
#include "lave/report/correlation_table.hpp"
#include "lave/report/render.hpp"
