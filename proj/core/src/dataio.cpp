#include "d2/dataio.hpp"

#include "d2/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace d2 {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line; false at end of stream.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  }

  int number() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream s(line);
  std::vector<std::string> out;
  for (std::string tok; s >> tok;) out.push_back(tok);
  return out;
}

bool parse_real(const std::string& tok, double& v) {
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  return ec == std::errc() && p == end && std::isfinite(v);
}

bool parse_int(const std::string& tok, long long& v) {
  const char* end = tok.data() + tok.size();
  auto [p, ec] = std::from_chars(tok.data(), end, v);
  return ec == std::errc() && p == end;
}

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::vector<DiscreteDistribution> read_dataset(std::istream& in, const TableRegistry& tables) {
  LineReader reader(in);
  std::vector<DiscreteDistribution> out;
  std::string line;
  for (int block = 0; reader.next(line); ++block) {
    auto fail = [&](const std::string& what) -> void {
      throw InputError("block " + std::to_string(block + 1) + " line " +
                       std::to_string(reader.number()) + ": " + what);
    };
    auto need_line = [&](const char* what) {
      if (!reader.next(line)) fail(std::string("unexpected end of input, expected ") + what);
      return split(line);
    };

    std::vector<std::string> head = split(line);
    std::shared_ptr<const CostTable> table;
    long long d = 0;
    if (head.size() == 2 && head[0] == "S") {
      auto it = tables.find(head[1]);
      if (it == tables.end()) fail("unknown cost table '" + head[1] + "'");
      table = it->second;
    } else if (head.size() != 1 || !parse_int(head[0], d) || d < 1) {
      fail("expected a positive dimension or 'S <table-id>'");
    }

    std::vector<std::string> toks = need_line("support size");
    long long m = 0;
    if (toks.size() != 1 || !parse_int(toks[0], m) || m < 1) fail("expected a positive support size");

    toks = need_line("weights");
    if (static_cast<long long>(toks.size()) != m) fail("expected " + std::to_string(m) + " weights");
    Eigen::VectorXd w(m);
    for (long long i = 0; i < m; ++i)
      if (!parse_real(toks[static_cast<std::size_t>(i)], w[i]) || w[i] < 0.0)
        fail("weight '" + toks[static_cast<std::size_t>(i)] + "' is not a non-negative real");
    const double total = w.sum();
    if (std::abs(total - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "weights sum to " << total << ", not 1";
      fail(msg.str());
    }
    if (total != 1.0) w /= total;

    if (table) {
      std::vector<int> symbols(static_cast<std::size_t>(m));
      for (long long i = 0; i < m; ++i) {
        toks = need_line("symbol index");
        long long s = 0;
        if (toks.size() != 1 || !parse_int(toks[0], s) || s < 0 || s >= table->size())
          fail("expected a symbol index into table '" + table->id + "'");
        symbols[static_cast<std::size_t>(i)] = static_cast<int>(s);
      }
      out.push_back(DiscreteDistribution::from_symbols(std::move(w), std::move(symbols), table));
    } else {
      Eigen::MatrixXd support(d, m);
      for (long long i = 0; i < m; ++i) {
        toks = need_line("support point");
        if (static_cast<long long>(toks.size()) != d)
          fail("support point has " + std::to_string(toks.size()) + " coordinates, expected " +
               std::to_string(d));
        for (long long r = 0; r < d; ++r)
          if (!parse_real(toks[static_cast<std::size_t>(r)], support(r, i)))
            fail("coordinate '" + toks[static_cast<std::size_t>(r)] + "' is not a real");
      }
      out.push_back(DiscreteDistribution::from_points(std::move(w), std::move(support)));
    }
  }
  return out;
}

std::vector<DiscreteDistribution> read_dataset_file(const std::string& path,
                                                    const TableRegistry& tables) {
  auto in = open_in(path);
  return read_dataset(in, tables);
}

void write_dataset(std::ostream& out, const std::vector<DiscreteDistribution>& data) {
  for (const auto& dist : data) {
    if (dist.symbolic())
      out << "S " << dist.table->id << '\n';
    else
      out << dist.dim() << '\n';
    out << dist.size() << '\n';
    for (int i = 0; i < dist.size(); ++i) out << (i ? " " : "") << real(dist.weights[i]);
    out << '\n';
    for (int i = 0; i < dist.size(); ++i) {
      if (dist.symbolic()) {
        out << dist.symbols[static_cast<std::size_t>(i)] << '\n';
        continue;
      }
      for (int r = 0; r < dist.dim(); ++r) out << (r ? " " : "") << real(dist.support(r, i));
      out << '\n';
    }
  }
}

void write_dataset_file(const std::string& path, const std::vector<DiscreteDistribution>& data) {
  auto out = open_out(path);
  write_dataset(out, data);
}

std::shared_ptr<const CostTable> read_cost_table(std::istream& in, std::string id) {
  LineReader reader(in);
  std::string line;
  auto fail = [&](const std::string& what) -> void {
    throw InputError("cost table '" + id + "' line " + std::to_string(reader.number()) + ": " +
                     what);
  };
  if (!reader.next(line)) fail("empty cost table");
  std::vector<std::string> head = split(line);
  long long k = 0;
  if (head.size() != 2 || head[0] != "S" || !parse_int(head[1], k) || k < 1)
    fail("expected 'S <size>'");
  auto table = std::make_shared<CostTable>();
  table->id = std::move(id);
  table->costs.resize(k, k);
  for (long long i = 0; i < k; ++i) {
    if (!reader.next(line)) fail("unexpected end of table");
    const auto toks = split(line);
    if (static_cast<long long>(toks.size()) != k) fail("expected " + std::to_string(k) + " costs");
    for (long long j = 0; j < k; ++j)
      if (!parse_real(toks[static_cast<std::size_t>(j)], table->costs(i, j)) ||
          table->costs(i, j) < 0.0)
        fail("cost '" + toks[static_cast<std::size_t>(j)] + "' is not a non-negative real");
  }
  return table;
}

std::shared_ptr<const CostTable> read_cost_table_file(const std::string& path, std::string id) {
  auto in = open_in(path);
  return read_cost_table(in, std::move(id));
}

void write_cost_table(std::ostream& out, const CostTable& table) {
  out << "S " << table.size() << '\n';
  for (int i = 0; i < table.size(); ++i) {
    for (int j = 0; j < table.size(); ++j) out << (j ? " " : "") << real(table.costs(i, j));
    out << '\n';
  }
}

std::vector<int> read_labels(std::istream& in) {
  LineReader reader(in);
  std::vector<int> labels;
  std::string line;
  while (reader.next(line)) {
    const auto toks = split(line);
    long long v = 0;
    if (toks.size() != 1 || !parse_int(toks[0], v) || v < INT32_MIN || v > INT32_MAX)
      throw InputError("labels line " + std::to_string(reader.number()) + ": expected an integer");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

std::vector<int> read_labels_file(const std::string& path) {
  auto in = open_in(path);
  return read_labels(in);
}

void write_labels(std::ostream& out, const std::vector<int>& labels) {
  for (int l : labels) out << l << '\n';
}

}  // namespace d2
