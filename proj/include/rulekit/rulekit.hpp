#pragma once

// Umbrella header for the whole library.

#include "rulekit/arff.hpp"
#include "rulekit/bitset.hpp"
#include "rulekit/csv.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/experiment.hpp"
#include "rulekit/expression.hpp"
#include "rulekit/induction.hpp"
#include "rulekit/knowledge.hpp"
#include "rulekit/measures.hpp"
#include "rulekit/model_io.hpp"
#include "rulekit/parallel.hpp"
#include "rulekit/prediction.hpp"
#include "rulekit/report.hpp"
#include "rulekit/rule.hpp"
#include "rulekit/stats.hpp"
#include "rulekit/xml.hpp"
