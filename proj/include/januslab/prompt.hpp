#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace januslab {

inline constexpr std::string_view kFrontView = "front view";
inline constexpr std::string_view kSideView = "side view";
inline constexpr std::string_view kBackView = "back view";
inline constexpr std::string_view kTopView = "top view";

// User prompt as lowercase whitespace tokens. Protected words carry P(u)=1
// and are never removed by debiasing.
struct Prompt {
  std::vector<std::string> words;
  std::set<std::string> protected_words;

  static Prompt parse(std::string_view text, const std::vector<std::string>& protect = {});
  std::string text() const;
  bool contains(std::string_view word) const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

// Closed azimuth interval in degrees; lo may be negative so that intervals
// can straddle 0.
struct AzimuthInterval {
  double lo_deg;
  double hi_deg;
  bool contains(double azimuth_deg) const noexcept;
  double center_deg() const noexcept;
};

struct ViewBin {
  std::string name;
  std::vector<AzimuthInterval> intervals;
};

/// Camera pose to view-prompt assignment. Bins are tested in order and the
/// first whose interval contains the azimuth wins, so shared closed
/// boundaries belong to the earlier bin. Elevations strictly above
/// top_elevation_deg map to top_name regardless of azimuth.
struct ViewBinConfig {
  std::vector<ViewBin> bins;
  std::string top_name{kTopView};
  double top_elevation_deg = 60.0;

  // front [-22.5, 22.5], back [157.5, 202.5], side covers the rest.
  static ViewBinConfig standard(double front_half_width_deg = 22.5);

  // Every view name, azimuth bins first then the top view.
  std::vector<std::string> names() const;
  const ViewBin* find(std::string_view name) const;
  // Throws InvalidArgument unless the azimuth bins cover [0, 360).
  void validate() const;
};

std::string assign_view_prompt(double azimuth_rad, double elevation_rad, const ViewBinConfig& cfg);

/// Conditional view probabilities per word: P(v | u present), P(v | u
/// absent) and the prior P(u present). A stand-in for masked-language-model
/// scores; any producer that writes the CSV format can plug in.
class CondProbTable {
 public:
  struct Entry {
    double p_present = 0.0;
    double p_absent = 0.0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  void set(const std::string& word, const std::string& view, Entry entry);
  void set_prior(const std::string& word, double prior);

  bool has_word(std::string_view word) const;
  const Entry& entry(std::string_view word, std::string_view view) const;  // LookupError
  double prior(std::string_view word) const;                               // LookupError
  std::vector<std::string> words() const;
  std::vector<std::string> views() const;  // in first-seen order

  // Line of the word's first row when the table was parsed from a file, else 0.
  void set_source_line(const std::string& word, int line);
  int source_line(std::string_view word) const;

  // Compares contents only; source lines are ignored.
  friend bool operator==(const CondProbTable& a, const CondProbTable& b) {
    return a.rows_ == b.rows_ && a.priors_ == b.priors_ && a.view_order_ == b.view_order_;
  }

 private:
  std::map<std::string, std::map<std::string, Entry, std::less<>>, std::less<>> rows_;
  std::map<std::string, double, std::less<>> priors_;
  std::map<std::string, int, std::less<>> source_lines_;
  std::vector<std::string> view_order_;
};

struct TableViolation {
  int line;  // 0 when the table did not come from a file
  std::string message;
};

// Reads `word,view,p_given_present,p_given_absent,prior`. An empty prior
// field falls back to default_prior. Throws ParseError on malformed input.
// parse_table does not check normalization; load_table does and throws
// ParseError naming the first violating row.
CondProbTable parse_table(std::istream& in, double default_prior = 0.5);
CondProbTable load_table(const std::filesystem::path& path, double default_prior = 0.5);
std::vector<TableViolation> validate_table(const CondProbTable& table, double tolerance = 1e-6);
void write_table(const CondProbTable& table, std::ostream& out);
void write_table(const CondProbTable& table, const std::filesystem::path& path);

// Ratio P(v|u) / sum_u' P(v|u') P(u') for u = present.
double pmi(std::string_view view, std::string_view word, const CondProbTable& table,
           std::optional<double> prior_override = std::nullopt);

enum class PmiNormalizer { max, mean };

struct PMIConfig {
  double threshold = 0.95;
  double default_prior = 0.5;
  PmiNormalizer normalizer = PmiNormalizer::max;
};

// pmi(v,u) divided by the word's max (or mean) pmi across the table's views.
double normalized_pmi(std::string_view view, std::string_view word, const CondProbTable& table,
                      PmiNormalizer normalizer);

struct WordDecision {
  std::string word;
  bool is_protected = false;
  double pmi = 1.0;
  double normalized = 1.0;
  bool removed = false;
};

// Per-word verdicts for the given view, in prompt order.
std::vector<WordDecision> explain_debias(const Prompt& prompt, std::string_view view,
                                         const CondProbTable& table, const PMIConfig& cfg);

// Removes every unprotected word with pmi < 1 and normalized pmi below the
// threshold. Survivors keep their order. Words missing from the table raise
// LookupError.
Prompt debias_prompt(const Prompt& prompt, std::string_view view, const CondProbTable& table,
                     const PMIConfig& cfg);

// "<view>, <words>" (just "<view>," for an empty prompt).
std::string render_view_prompt(std::string_view view, const Prompt& prompt);

}  // namespace januslab
