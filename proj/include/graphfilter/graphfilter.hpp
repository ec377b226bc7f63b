#pragma once

#include "graphfilter/error.hpp"
#include "graphfilter/tokenizer.hpp"
#include "graphfilter/corpus.hpp"
#include "graphfilter/graph.hpp"
#include "graphfilter/quality.hpp"
#include "graphfilter/lazy_heap.hpp"
#include "graphfilter/selector.hpp"
#include "graphfilter/metrics.hpp"
#include "graphfilter/app.hpp"
