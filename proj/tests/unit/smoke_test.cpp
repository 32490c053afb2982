#include <chanscope/chanscope.hpp>
#include <chanscope/svg.hpp>

#include <gtest/gtest.h>

TEST(Smoke, HeadersCompile) { SUCCEED(); }
