#ifndef PLUCASE_TEXT_HPP
#define PLUCASE_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace plucase::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercases, strips punctuation and the stop words "the", "a", "an".
// Used to compare entity phrases against condition phrases.
std::vector<std::string> normalize_phrase(std::string_view phrase);

// True when `needle` occurs as a contiguous token subsequence of `haystack`.
bool contains_token_seq(const std::vector<std::string>& haystack,
                        const std::vector<std::string>& needle);

// Whole file as a string; throws IOFailure when unreadable.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace plucase::text

#endif
