#pragma once

#include <string>
#include <vector>

#include "songcraft/music_pipeline.hpp"

namespace songcraft::testing {

std::string LowerAscii(std::string s);
std::vector<std::string> SplitComma(const std::string& s);

/// Priority concatenation, case-insensitive dedupe, longest prefix within the limit.
std::vector<std::string> OracleKeywords(const music::MusicComponents& c);

/// 1000 (or `rounds`) random component sets; empty when every invariant and
/// the oracle hold.
std::string RandomStylePromptCheck(int rounds, unsigned seed);

}  // namespace songcraft::testing
