#include "januslab/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "januslab/errors.hpp"

namespace januslab {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

}  // namespace

Prompt Prompt::parse(std::string_view text, const std::vector<std::string>& protect) {
  Prompt p;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) p.words.push_back(lowercase(token));
  for (const auto& w : protect) {
    const std::string lw = lowercase(trim(w));
    if (p.contains(lw)) p.protected_words.insert(lw);
  }
  return p;
}

std::string Prompt::text() const {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

bool Prompt::contains(std::string_view word) const {
  return std::find(words.begin(), words.end(), word) != words.end();
}

bool AzimuthInterval::contains(double azimuth_deg) const noexcept {
  // Shift the query into [lo, lo + 360) before comparing.
  const double shifted = lo_deg + wrap_degrees(azimuth_deg - lo_deg);
  return shifted >= lo_deg && shifted <= hi_deg;
}

double AzimuthInterval::center_deg() const noexcept { return wrap_degrees(0.5 * (lo_deg + hi_deg)); }

ViewBinConfig ViewBinConfig::standard(double front_half_width_deg) {
  const double h = front_half_width_deg;
  ViewBinConfig cfg;
  cfg.bins = {
      {std::string(kFrontView), {{-h, h}}},
      {std::string(kBackView), {{180.0 - h, 180.0 + h}}},
      {std::string(kSideView), {{h, 180.0 - h}, {180.0 + h, 360.0 - h}}},
  };
  return cfg;
}

std::vector<std::string> ViewBinConfig::names() const {
  std::vector<std::string> out;
  for (const auto& b : bins) out.push_back(b.name);
  if (std::find(out.begin(), out.end(), top_name) == out.end()) out.push_back(top_name);
  return out;
}

const ViewBin* ViewBinConfig::find(std::string_view name) const {
  for (const auto& b : bins) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

void ViewBinConfig::validate() const {
  if (bins.empty()) throw InvalidArgument("view bin config has no bins");
  for (const auto& b : bins) {
    if (b.intervals.empty()) throw InvalidArgument("view bin '" + b.name + "' has no azimuth interval");
    for (const auto& iv : b.intervals) {
      if (!(iv.hi_deg >= iv.lo_deg) || iv.hi_deg - iv.lo_deg > 360.0) {
        throw InvalidArgument("view bin '" + b.name + "' has an invalid interval");
      }
    }
  }
  // Coverage check on a fine grid plus every interval endpoint.
  std::vector<double> probes;
  for (int i = 0; i < 3600; ++i) probes.push_back(i * 0.1 + 0.05);
  for (const auto& b : bins) {
    for (const auto& iv : b.intervals) {
      probes.push_back(wrap_degrees(iv.lo_deg));
      probes.push_back(wrap_degrees(iv.hi_deg));
    }
  }
  for (double az : probes) {
    const bool covered = std::any_of(bins.begin(), bins.end(), [&](const ViewBin& b) {
      return std::any_of(b.intervals.begin(), b.intervals.end(), [&](const AzimuthInterval& iv) { return iv.contains(az); });
    });
    if (!covered) throw InvalidArgument("view bins leave azimuth " + std::to_string(az) + " uncovered");
  }
}

std::string assign_view_prompt(double azimuth_rad, double elevation_rad, const ViewBinConfig& cfg) {
  if (!std::isfinite(azimuth_rad) || !std::isfinite(elevation_rad)) {
    throw InvalidArgument("assign_view_prompt: non-finite angle");
  }
  const double elevation_deg = elevation_rad * 180.0 / std::numbers::pi;
  if (elevation_deg > cfg.top_elevation_deg) return cfg.top_name;
  const double az = wrap_degrees(azimuth_rad * 180.0 / std::numbers::pi);
  for (const auto& b : cfg.bins) {
    for (const auto& iv : b.intervals) {
      if (iv.contains(az)) return b.name;
    }
  }
  throw InvalidArgument("view bins do not cover azimuth " + std::to_string(az));
}

void CondProbTable::set(const std::string& word, const std::string& view, Entry entry) {
  rows_[word][view] = entry;
  if (std::find(view_order_.begin(), view_order_.end(), view) == view_order_.end()) view_order_.push_back(view);
  priors_.try_emplace(word, 0.5);
}

void CondProbTable::set_prior(const std::string& word, double prior) { priors_[word] = prior; }

bool CondProbTable::has_word(std::string_view word) const { return rows_.find(word) != rows_.end(); }

const CondProbTable::Entry& CondProbTable::entry(std::string_view word, std::string_view view) const {
  const auto row = rows_.find(word);
  if (row == rows_.end()) throw LookupError("no table rows for word '" + std::string(word) + "'");
  const auto cell = row->second.find(view);
  if (cell == row->second.end()) {
    throw LookupError("no table row for word '" + std::string(word) + "' and view '" + std::string(view) + "'");
  }
  return cell->second;
}

double CondProbTable::prior(std::string_view word) const {
  const auto it = priors_.find(word);
  if (it == priors_.end()) throw LookupError("no prior for word '" + std::string(word) + "'");
  return it->second;
}

std::vector<std::string> CondProbTable::words() const {
  std::vector<std::string> out;
  for (const auto& [w, _] : rows_) out.push_back(w);
  return out;
}

std::vector<std::string> CondProbTable::views() const { return view_order_; }

void CondProbTable::set_source_line(const std::string& word, int line) { source_lines_[word] = line; }

int CondProbTable::source_line(std::string_view word) const {
  const auto it = source_lines_.find(word);
  return it == source_lines_.end() ? 0 : it->second;
}

CondProbTable parse_table(std::istream& in, double default_prior) {
  static const std::vector<std::string> kColumns = {"word", "view", "p_given_present", "p_given_absent", "prior"};
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw ParseError("empty table (missing header)", line_no);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const auto& c : kColumns) {
    if (!column.contains(c)) throw ParseError("missing column '" + c + "'", line_no);
  }

  CondProbTable table;
  std::map<std::string, double> seen_prior;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    auto number = [&](const std::string& name) {
      const std::string& text = fields[column[name]];
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
      } catch (const std::exception&) {
        throw ParseError("column '" + name + "' is not a number: '" + text + "'", line_no);
      }
    };
    const std::string word = lowercase(fields[column["word"]]);
    const std::string view = fields[column["view"]];
    if (word.empty() || view.empty()) throw ParseError("empty word or view", line_no);
    CondProbTable::Entry entry{number("p_given_present"), number("p_given_absent")};
    const double prior = fields[column["prior"]].empty() ? default_prior : number("prior");
    if (const auto it = seen_prior.find(word); it != seen_prior.end() && it->second != prior) {
      throw ParseError("inconsistent prior for word '" + word + "'", line_no);
    }
    seen_prior[word] = prior;
    table.set(word, view, entry);
    table.set_prior(word, prior);
    if (table.source_line(word) == 0) table.set_source_line(word, line_no);
  }
  return table;
}

std::vector<TableViolation> validate_table(const CondProbTable& table, double tolerance) {
  std::vector<TableViolation> out;
  const auto views = table.views();
  for (const auto& word : table.words()) {
    const int line = table.source_line(word);
    double sum_present = 0.0;
    double sum_absent = 0.0;
    for (const auto& view : views) {
      CondProbTable::Entry e;
      try {
        e = table.entry(word, view);
      } catch (const LookupError&) {
        out.push_back({line, "word '" + word + "' has no row for view '" + view + "'"});
        continue;
      }
      if (e.p_present < 0.0 || e.p_present > 1.0 || e.p_absent < 0.0 || e.p_absent > 1.0) {
        out.push_back({line, "word '" + word + "', view '" + view + "': probability outside [0,1]"});
      }
      sum_present += e.p_present;
      sum_absent += e.p_absent;
    }
    if (std::abs(sum_present - 1.0) > tolerance) {
      out.push_back({line, "word '" + word + "': P(v|present) sums to " + std::to_string(sum_present)});
    }
    if (std::abs(sum_absent - 1.0) > tolerance) {
      out.push_back({line, "word '" + word + "': P(v|absent) sums to " + std::to_string(sum_absent)});
    }
    const double prior = table.prior(word);
    if (!(prior >= 0.0 && prior <= 1.0)) out.push_back({line, "word '" + word + "': prior outside [0,1]"});
  }
  return out;
}

CondProbTable load_table(const std::filesystem::path& path, double default_prior) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table " + path.string());
  CondProbTable table = parse_table(in, default_prior);
  const auto violations = validate_table(table);
  if (!violations.empty()) {
    throw ParseError("table violation: " + violations.front().message, violations.front().line);
  }
  return table;
}

void write_table(const CondProbTable& table, std::ostream& out) {
  out << "word,view,p_given_present,p_given_absent,prior\n";
  out << std::setprecision(17);
  for (const auto& word : table.words()) {
    for (const auto& view : table.views()) {
      CondProbTable::Entry e;
      try {
        e = table.entry(word, view);
      } catch (const LookupError&) {
        continue;
      }
      out << word << ',' << view << ',' << e.p_present << ',' << e.p_absent << ',' << table.prior(word) << '\n';
    }
  }
}

void write_table(const CondProbTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_table(table, out);
}

double pmi(std::string_view view, std::string_view word, const CondProbTable& table,
           std::optional<double> prior_override) {
  const auto& e = table.entry(word, view);
  const double prior = prior_override.value_or(table.prior(word));
  const double marginal = e.p_present * prior + e.p_absent * (1.0 - prior);
  if (!(marginal > 0.0)) throw InvalidArgument("pmi: view '" + std::string(view) + "' has zero marginal probability");
  return e.p_present / marginal;
}

double normalized_pmi(std::string_view view, std::string_view word, const CondProbTable& table,
                      PmiNormalizer normalizer) {
  const double value = pmi(view, word, table);
  double reference = 0.0;
  int count = 0;
  for (const auto& v : table.views()) {
    const double p = pmi(v, word, table);
    reference = normalizer == PmiNormalizer::max ? std::max(reference, p) : reference + p;
    ++count;
  }
  if (normalizer == PmiNormalizer::mean) reference /= count;
  return reference > 0.0 ? value / reference : 0.0;
}

std::vector<WordDecision> explain_debias(const Prompt& prompt, std::string_view view,
                                         const CondProbTable& table, const PMIConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw InvalidArgument("PMI threshold must be > 0");
  std::vector<WordDecision> out;
  for (const auto& word : prompt.words) {
    WordDecision d;
    d.word = word;
    if (prompt.protected_words.contains(word)) {
      d.is_protected = true;  // P(u) = 1 makes the ratio exactly 1
    } else {
      if (!table.has_word(word)) throw LookupError("word '" + word + "' is not covered by the table");
      d.pmi = pmi(view, word, table);
      d.normalized = normalized_pmi(view, word, table, cfg.normalizer);
      d.removed = d.pmi < 1.0 && d.normalized < cfg.threshold;
    }
    out.push_back(d);
  }
  // Never debias a prompt down to nothing: keep the best-scoring word.
  const bool all_removed =
      !out.empty() && std::all_of(out.begin(), out.end(), [](const WordDecision& d) { return d.removed; });
  if (all_removed) {
    auto best = std::max_element(out.begin(), out.end(),
                                 [](const WordDecision& a, const WordDecision& b) { return a.normalized < b.normalized; });
    best->removed = false;
  }
  return out;
}

Prompt debias_prompt(const Prompt& prompt, std::string_view view, const CondProbTable& table, const PMIConfig& cfg) {
  const auto decisions = explain_debias(prompt, view, table, cfg);
  Prompt out;
  out.protected_words = prompt.protected_words;
  for (const auto& d : decisions) {
    if (!d.removed) out.words.push_back(d.word);
  }
  return out;
}

std::string render_view_prompt(std::string_view view, const Prompt& prompt) {
  std::string out(view);
  out += ',';
  if (!prompt.words.empty()) out += ' ' + prompt.text();
  return out;
}

}  // namespace januslab
