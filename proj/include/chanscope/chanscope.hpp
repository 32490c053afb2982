#pragma once

#include <chanscope/archive.hpp>
#include <chanscope/baseline.hpp>
#include <chanscope/channel_label.hpp>
#include <chanscope/chunking.hpp>
#include <chanscope/classify.hpp>
#include <chanscope/community.hpp>
#include <chanscope/core.hpp>
#include <chanscope/graph.hpp>
#include <chanscope/graph_embed.hpp>
#include <chanscope/hclust.hpp>
#include <chanscope/head.hpp>
#include <chanscope/io.hpp>
#include <chanscope/metrics.hpp>
#include <chanscope/nn.hpp>
#include <chanscope/rng.hpp>
#include <chanscope/topics.hpp>
#include <chanscope/trend.hpp>
