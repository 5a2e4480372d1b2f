#include "ehg/record_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "ehg/errors.hpp"
#include "ehg/text.hpp"

namespace ehg {

namespace {

constexpr double kDefaultSamplingRate = 250.0;  // WFDB default when fs is omitted

void parse_comment_metadata(std::string_view body, RecordHeader& header) {
  const auto tokens = text::split_whitespace(body);
  if (tokens.size() < 2) return;
  std::string key = text::to_lower(tokens[0]);
  if (!key.empty() && key.back() == ':') key.pop_back();
  std::string_view value = tokens[1];
  if (value == ":" && tokens.size() >= 3) value = tokens[2];

  if (key == "gestation") {
    if (const auto weeks = text::parse_number<double>(value); weeks && *weeks > 0.0) {
      header.gestation_weeks = *weeks;
    }
  } else if (key == "group") {
    try {
      header.group = parse_group(value);
    } catch (const ValidationError&) {
      // unknown group names are left to the dataset index
    }
  }
}

// Parses "gain(baseline)/units"; any part may be absent.
void parse_gain_field(std::string_view field, std::size_t line, ChannelInfo& ch,
                      bool& has_baseline) {
  if (const auto slash = field.find('/'); slash != std::string_view::npos) {
    ch.units = std::string(field.substr(slash + 1));
    field = field.substr(0, slash);
  }
  if (const auto open = field.find('('); open != std::string_view::npos) {
    const auto close = field.find(')', open);
    if (close == std::string_view::npos) throw ParseError(line, "unterminated baseline in gain field");
    const auto baseline = text::parse_number<int>(field.substr(open + 1, close - open - 1));
    if (!baseline) throw ParseError(line, "invalid baseline");
    ch.baseline = *baseline;
    has_baseline = true;
    field = field.substr(0, open);
  }
  if (field.empty()) return;
  const auto gain = text::parse_number<double>(field);
  if (!gain) throw ParseError(line, "invalid ADC gain '" + std::string(field) + "'");
  ch.adc_gain = (*gain == 0.0) ? kDefaultAdcGain : *gain;
}

ChannelInfo parse_signal_line(std::string_view line_text, std::size_t line) {
  const auto tokens = text::split_whitespace(line_text);
  if (tokens.size() < 2) throw ParseError(line, "signal line needs at least a file name and format");

  ChannelInfo ch;
  ch.file_name = std::string(tokens[0]);

  std::string_view fmt = tokens[1];
  std::size_t digits = 0;
  while (digits < fmt.size() && fmt[digits] >= '0' && fmt[digits] <= '9') ++digits;
  const auto code = text::parse_number<int>(fmt.substr(0, digits));
  if (!code) throw ParseError(line, "invalid storage format '" + std::string(fmt) + "'");
  ch.storage_format = *code;
  if (ch.storage_format != 16) {
    throw UnsupportedFormatError("line " + std::to_string(line) + ": storage format " +
                                 std::to_string(ch.storage_format) + " is not supported");
  }
  if (digits < fmt.size()) {
    // Modifiers: xN samples per frame, :skew, +byte offset. Only the trivial values are accepted.
    const std::string_view rest = fmt.substr(digits);
    if (rest != "x1" && rest != "+0" && rest != ":0") {
      throw UnsupportedFormatError("line " + std::to_string(line) + ": format modifier '" +
                                   std::string(rest) + "' is not supported");
    }
  }

  bool has_baseline = false;
  if (tokens.size() >= 3) parse_gain_field(tokens[2], line, ch, has_baseline);
  if (tokens.size() >= 5 && !has_baseline) {
    const auto adc_zero = text::parse_number<int>(tokens[4]);
    if (!adc_zero) throw ParseError(line, "invalid ADC zero");
    ch.baseline = *adc_zero;
  }
  if (tokens.size() > 8) {
    const auto* first = tokens[8].data();
    ch.label = std::string(text::trim(std::string_view(first, line_text.data() + line_text.size() - first)));
  }
  return ch;
}

}  // namespace

std::string_view to_string(Group g) {
  switch (g) {
    case Group::Preterm: return "preterm";
    case Group::Term: return "term";
    case Group::Nonpregnant: return "nonpregnant";
  }
  return "unknown";
}

std::string_view to_string(ChannelRole r) { return r == ChannelRole::Toco ? "TOCO" : "EHG"; }

std::string_view to_string(IntervalKind k) {
  return k == IntervalKind::Contraction ? "contraction" : "dummy";
}

Group parse_group(std::string_view s) {
  const auto v = text::to_lower(text::trim(s));
  if (v == "preterm" || v == "p") return Group::Preterm;
  if (v == "term" || v == "t") return Group::Term;
  if (v == "nonpregnant" || v == "non-pregnant" || v == "n") return Group::Nonpregnant;
  throw ValidationError("unknown group '" + std::string(s) + "'");
}

IntervalKind parse_interval_kind(std::string_view s) {
  const auto v = text::to_lower(text::trim(s));
  if (v == "contraction" || v == "c") return IntervalKind::Contraction;
  if (v == "dummy" || v == "d") return IntervalKind::Dummy;
  throw ValidationError("unknown interval kind '" + std::string(s) + "'");
}

RecordHeader parse_header(std::string_view text_in) {
  RecordHeader header;
  const auto lines = text::split_lines(text_in);
  bool have_record_line = false;
  std::size_t last_line = 0;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = text::trim(lines[i]);
    if (line.empty()) continue;
    last_line = line_no;
    if (line.front() == '#') {
      const auto body = text::trim(line.substr(1));
      header.comments.emplace_back(body);
      parse_comment_metadata(body, header);
      continue;
    }

    if (!have_record_line) {
      const auto tokens = text::split_whitespace(line);
      if (tokens.size() < 2) throw ParseError(line_no, "record line needs a name and signal count");
      if (tokens[0].find('/') != std::string_view::npos) {
        throw UnsupportedFormatError("line " + std::to_string(line_no) +
                                     ": multi-segment records are not supported");
      }
      header.record_name = std::string(tokens[0]);
      const auto nsig = text::parse_number<std::size_t>(tokens[1]);
      if (!nsig || *nsig == 0) throw ParseError(line_no, "invalid signal count");
      header.n_channels = *nsig;

      header.sampling_rate_hz = kDefaultSamplingRate;
      if (tokens.size() >= 3) {
        std::string_view fs = tokens[2];
        fs = fs.substr(0, fs.find_first_of("/("));
        const auto rate = text::parse_number<double>(fs);
        if (!rate || !(*rate > 0.0)) throw ParseError(line_no, "invalid sampling frequency");
        header.sampling_rate_hz = *rate;
      }
      if (tokens.size() < 4) throw ParseError(line_no, "missing sample count");
      const auto nsamp = text::parse_number<std::size_t>(tokens[3]);
      if (!nsamp || *nsamp == 0) throw ParseError(line_no, "invalid sample count");
      header.n_samples = *nsamp;
      have_record_line = true;
      continue;
    }

    if (header.channels.size() == header.n_channels) {
      throw ParseError(line_no, "unexpected line after " + std::to_string(header.n_channels) +
                                    " signal lines");
    }
    header.channels.push_back(parse_signal_line(line, line_no));
  }

  if (!have_record_line) throw ParseError(last_line + 1, "empty header: no record line");
  if (header.channels.size() != header.n_channels) {
    throw ParseError(last_line + 1, "expected " + std::to_string(header.n_channels) +
                                        " signal lines, found " +
                                        std::to_string(header.channels.size()));
  }
  return header;
}

std::vector<std::vector<double>> read_signals(const RecordHeader& header,
                                              std::span<const std::uint8_t> bytes) {
  const std::size_t nch = header.n_channels;
  for (const auto& ch : header.channels) {
    if (ch.file_name != header.channels.front().file_name) {
      throw ValidationError("read_signals expects all channels in one file; use load_record");
    }
  }
  const std::size_t expected = header.n_samples * nch * 2;
  if (bytes.size() != expected) {
    throw LengthError("signal data has " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected) + " (" + std::to_string(header.n_samples) +
                      " samples x " + std::to_string(nch) + " channels x 2)");
  }

  std::vector<std::vector<double>> out(nch, std::vector<double>(header.n_samples));
  std::size_t pos = 0;
  for (std::size_t n = 0; n < header.n_samples; ++n) {
    for (std::size_t c = 0; c < nch; ++c) {
      const auto raw = static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
      pos += 2;
      const auto adc = static_cast<std::int16_t>(raw);
      const auto& info = header.channels[c];
      out[c][n] = (static_cast<double>(adc) - info.baseline) / info.adc_gain;
    }
  }
  return out;
}

std::string format_header(const RecordHeader& header) {
  std::ostringstream os;
  os.precision(12);
  os << header.record_name << ' ' << header.n_channels << ' ' << header.sampling_rate_hz << ' '
     << header.n_samples << '\n';
  for (const auto& ch : header.channels) {
    os << ch.file_name << ' ' << ch.storage_format << ' ' << ch.adc_gain << '(' << ch.baseline
       << ')';
    if (!ch.units.empty()) os << '/' << ch.units;
    os << " 16 " << ch.baseline << " 0 0 0";
    if (!ch.label.empty()) os << ' ' << ch.label;
    os << '\n';
  }
  bool wrote_gestation = false;
  bool wrote_group = false;
  for (const auto& c : header.comments) {
    const auto key = text::to_lower(c.substr(0, c.find_first_of(" \t:")));
    wrote_gestation |= key == "gestation";
    wrote_group |= key == "group";
    os << '#' << c << '\n';
  }
  if (header.gestation_weeks && !wrote_gestation) os << "#Gestation " << *header.gestation_weeks << '\n';
  if (header.group && !wrote_group) os << "#Group " << to_string(*header.group) << '\n';
  return os.str();
}

std::vector<std::uint8_t> encode_format16(const RecordHeader& header,
                                          const std::vector<std::vector<double>>& signals) {
  if (signals.size() != header.n_channels) throw ValidationError("channel count mismatch");
  for (const auto& s : signals) {
    if (s.size() != header.n_samples) throw LengthError("signal length does not match n_samples");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(header.n_samples * header.n_channels * 2);
  for (std::size_t n = 0; n < header.n_samples; ++n) {
    for (std::size_t c = 0; c < header.n_channels; ++c) {
      const auto& info = header.channels[c];
      // -32768 is reserved by WFDB as the invalid-sample marker
      const double adc = std::clamp(std::round(signals[c][n] * info.adc_gain + info.baseline),
                                    -32767.0, 32767.0);
      const auto raw = static_cast<std::uint16_t>(static_cast<std::int16_t>(adc));
      bytes.push_back(static_cast<std::uint8_t>(raw & 0xFF));
      bytes.push_back(static_cast<std::uint8_t>(raw >> 8));
    }
  }
  return bytes;
}

std::vector<IntervalAnnotation> load_annotations(std::string_view csv) {
  const auto lines = text::split_lines(csv);
  std::size_t i = 0;
  while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw ParseError(1, "annotation manifest has no header row");

  const auto header = text::split(text::trim(lines[i]), ',');
  const char* expected[] = {"record", "kind", "start_sample", "end_sample"};
  if (header.size() != 4 ||
      !std::equal(header.begin(), header.end(), std::begin(expected),
                  [](std::string_view a, const char* b) { return text::to_lower(text::trim(a)) == b; })) {
    throw ParseError(i + 1, "expected header 'record,kind,start_sample,end_sample'");
  }

  std::vector<IntervalAnnotation> out;
  std::vector<std::size_t> row_line;
  for (++i; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 fields");
    IntervalAnnotation a;
    a.record_name = std::string(text::trim(fields[0]));
    if (a.record_name.empty()) throw ParseError(line_no, "empty record name");
    try {
      a.kind = parse_interval_kind(fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
    const auto start = text::parse_number<long long>(fields[2]);
    const auto end = text::parse_number<long long>(fields[3]);
    if (!start || !end) throw ParseError(line_no, "invalid sample index");
    if (*start < 0 || *end <= *start) {
      throw ValidationError("row at line " + std::to_string(line_no) + " (" + std::string(line) +
                            "): interval must satisfy 0 <= start_sample < end_sample");
    }
    a.start_sample = static_cast<std::size_t>(*start);
    a.end_sample = static_cast<std::size_t>(*end);
    out.push_back(std::move(a));
    row_line.push_back(line_no);
  }

  std::vector<std::size_t> order(out.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out[a].record_name != out[b].record_name) return out[a].record_name < out[b].record_name;
    return out[a].start_sample < out[b].start_sample;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& prev = out[order[k - 1]];
    const auto& cur = out[order[k]];
    if (prev.record_name == cur.record_name && cur.start_sample < prev.end_sample) {
      throw ValidationError("row at line " + std::to_string(row_line[order[k]]) +
                            " overlaps row at line " + std::to_string(row_line[order[k - 1]]) +
                            " in record " + cur.record_name);
    }
  }
  return out;
}

void validate_annotation_bounds(std::span<const IntervalAnnotation> annotations,
                                std::string_view record_name, std::size_t n_samples) {
  for (const auto& a : annotations) {
    if (a.record_name != record_name) continue;
    if (a.end_sample > n_samples || a.start_sample >= a.end_sample) {
      throw ValidationError("annotation [" + std::to_string(a.start_sample) + ", " +
                            std::to_string(a.end_sample) + ") is outside record " +
                            std::string(record_name) + " of " + std::to_string(n_samples) +
                            " samples");
    }
  }
}

std::map<std::string, Group> load_group_index(std::string_view csv) {
  std::map<std::string, Group> index;
  const auto lines = text::split_lines(csv);
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 2) throw ParseError(i + 1, "expected 'record,group'");
    if (!header_seen) {
      header_seen = true;
      if (text::to_lower(text::trim(fields[0])) == "record") continue;
    }
    try {
      index[std::string(text::trim(fields[0]))] = parse_group(fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(i + 1, e.what());
    }
  }
  return index;
}

ChannelRole role_from_label(std::string_view label) {
  return text::to_lower(label).find("toco") != std::string::npos ? ChannelRole::Toco
                                                                   : ChannelRole::Ehg;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Record load_record(const std::filesystem::path& header_path,
                   const std::map<std::string, Group>& index) {
  Record rec;
  rec.header = parse_header(read_text_file(header_path));
  const auto dir = header_path.parent_path();
  const auto& h = rec.header;

  rec.signals.assign(h.n_channels, {});
  std::vector<bool> done(h.n_channels, false);
  for (std::size_t c = 0; c < h.n_channels; ++c) {
    if (done[c]) continue;
    RecordHeader sub = h;
    sub.channels.clear();
    std::vector<std::size_t> members;
    for (std::size_t k = c; k < h.n_channels; ++k) {
      if (h.channels[k].file_name == h.channels[c].file_name) {
        members.push_back(k);
        sub.channels.push_back(h.channels[k]);
      }
    }
    sub.n_channels = members.size();
    const auto bytes = read_binary_file(dir / h.channels[c].file_name);
    auto decoded = read_signals(sub, bytes);
    for (std::size_t m = 0; m < members.size(); ++m) {
      rec.signals[members[m]] = std::move(decoded[m]);
      done[members[m]] = true;
    }
  }

  rec.gestation_at_delivery_weeks = h.gestation_weeks;
  if (h.group) {
    rec.group = *h.group;
  } else if (h.gestation_weeks) {
    rec.group = *h.gestation_weeks < kPretermGestationWeeks ? Group::Preterm : Group::Term;
  } else if (const auto it = index.find(h.record_name); it != index.end()) {
    rec.group = it->second;
  } else {
    throw ValidationError("record " + h.record_name +
                          ": no group in header metadata and no entry in the dataset index");
  }
  for (const auto& ch : h.channels) rec.channel_roles.push_back(role_from_label(ch.label));
  return rec;
}

std::vector<std::string> list_records(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw ValidationError("dataset root " + root.string() + " is not a directory");
  std::vector<std::string> names;
  if (fs::exists(root / "RECORDS")) {
    const auto listing = read_text_file(root / "RECORDS");
    for (const auto line : text::split_lines(listing)) {
      const auto name = text::trim(line);
      if (!name.empty()) names.emplace_back(name);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".hea") {
        names.push_back(entry.path().stem().string());
      }
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace ehg
