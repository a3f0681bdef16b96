#pragma once

// Reference-less semantic faithfulness scores between the semantic graph of a
// sentence and the semantic graph of its correction.

#include "usim/alignment.hpp"
#include "usim/assignment.hpp"
#include "usim/corpus.hpp"
#include "usim/edit_distance.hpp"
#include "usim/edit_harness.hpp"
#include "usim/error.hpp"
#include "usim/graph.hpp"
#include "usim/graph_io.hpp"
#include "usim/measures.hpp"
#include "usim/rational.hpp"
#include "usim/report.hpp"
