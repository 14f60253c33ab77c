#include "semgrex/cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "semgrex/ssurgeon.h"

namespace semgrex {

namespace {

using nlohmann::ordered_json;

struct InputText {
  std::string name;
  std::string text;
};

std::string ReadFile(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

std::vector<InputText> ReadInputs(const std::vector<std::string>& paths, std::istream& in) {
  std::vector<InputText> out;
  if (paths.empty()) {
    std::ostringstream buf;
    buf << in.rdbuf();
    out.push_back({"<stdin>", buf.str()});
    return out;
  }
  for (const std::string& p : paths) {
    if (p == "-") {
      std::ostringstream buf;
      buf << in.rdbuf();
      out.push_back({"<stdin>", buf.str()});
    } else {
      out.push_back({p, ReadFile(p)});
    }
  }
  return out;
}

ReportedMatch Describe(const DepGraph& graph, const Match& m) {
  ReportedMatch r;
  r.anchor = {"", m.anchor, graph.node(m.anchor).word};
  for (const auto& [name, id] : m.nodes) r.nodes.push_back({name, id, graph.node(id).word});
  for (const auto& [name, e] : m.edges) r.edges.push_back({name, e.gov, e.dep, e.relation});
  return r;
}

ordered_json NodeJson(const ReportedNode& n, bool with_name) {
  ordered_json j;
  if (with_name) j["name"] = n.name;
  j["index"] = n.id.index;
  j["copy"] = n.id.copy;
  j["word"] = n.word;
  return j;
}

ordered_json IdJson(NodeId id) {
  ordered_json j;
  j["index"] = id.index;
  j["copy"] = id.copy;
  return j;
}

// One entry per sentence, computed by `fn(i)`, spread over worker threads.
template <class T, class Fn>
std::vector<T> ParallelMap(std::size_t count, int threads, Fn fn) {
  std::vector<T> out(count);
  std::size_t workers = std::clamp<std::size_t>(threads > 0 ? threads : 1, 1,
                                                std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int Search(const std::vector<std::string>& pattern_texts,
           const std::vector<std::string>& pattern_files,
           const std::vector<std::string>& inputs, GraphMode mode, const std::string& format,
           bool quiet, int threads, std::istream& in, std::ostream& out) {
  std::vector<std::string> texts = pattern_texts;
  for (const std::string& path : pattern_files) {
    // One pattern per blank-line separated block; '#' lines are comments.
    std::istringstream file(ReadFile(path));
    std::string line, block;
    auto flush = [&] {
      if (block.find_first_not_of(" \t\n") != std::string::npos) texts.push_back(block);
      block.clear();
    };
    while (std::getline(file, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) {
        flush();
      } else if (line.find_first_not_of(" \t") != line.find('#')) {
        block += line + "\n";
      }
    }
    flush();
  }
  if (texts.empty()) throw std::runtime_error("no pattern given (use --pattern or --pattern-file)");

  std::vector<Pattern> patterns;
  MatchReport report;
  for (const std::string& t : texts) {
    patterns.push_back(Pattern::Parse(t));
    report.patterns.push_back(patterns.back().ToString());
  }

  std::size_t next_index = 1;
  for (const InputText& input : ReadInputs(inputs, in)) {
    Document doc = ParseDocument(input.text, mode, input.name);
    CollectMatches(doc, patterns, next_index, threads, report);
    next_index += doc.sentences.size();
  }

  if (quiet) {
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      std::size_t matches = 0, sentences = 0;
      for (const SentenceResult& s : report.sentences) {
        matches += s.per_pattern[p].size();
        if (!s.per_pattern[p].empty()) ++sentences;
      }
      out << "pattern#" << p + 1 << " matches=" << matches << " sentences=" << sentences
          << "\n";
    }
  } else if (format == "json") {
    out << RenderJson(report);
  } else {
    out << RenderText(report);
  }
  return report.total_matches() > 0 ? 0 : 1;
}

int Rewrite(const std::string& rules_path, const std::vector<std::string>& inputs,
            GraphMode mode, bool emit_report, bool in_place, std::int64_t cap,
            std::istream& in, std::ostream& out, std::ostream& err) {
  std::vector<SsurgeonRule> rules = ParseRuleFile(ReadFile(rules_path), rules_path);
  ApplyOptions options;
  options.iteration_cap = cap;
  std::size_t offset = 0;
  for (const InputText& input : ReadInputs(inputs, in)) {
    Document doc = ParseDocument(input.text, mode, input.name);
    EditReport report = ApplyRules(doc, rules, options);
    std::string text = SerializeDocument(doc, mode);
    if (emit_report) {
      for (const SentenceReport& s : report.sentences) {
        for (const auto& [id, n] : s.changes) {
          err << "sent#" << offset + s.sentence_index + 1 << " rule=" << id
              << " changes=" << n << "\n";
        }
      }
    }
    if (in_place && input.name != "<stdin>") {
      std::ofstream file(input.name, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot write " + input.name);
      file << text;
    } else {
      out << text;
    }
    offset += doc.sentences.size();
  }
  return 0;
}

}  // namespace

std::size_t SentenceResult::match_count() const {
  std::size_t n = 0;
  for (const auto& p : per_pattern) n += p.size();
  return n;
}

std::size_t MatchReport::total_matches() const {
  std::size_t n = 0;
  for (const SentenceResult& s : sentences) n += s.match_count();
  return n;
}

std::string SentenceText(const DepGraph& graph) {
  for (const std::string& c : graph.comments) {
    std::string_view body(c);
    body.remove_prefix(1);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    if (body.starts_with("text =")) {
      body.remove_prefix(6);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      return std::string(body);
    }
  }
  return graph.Text();
}

void CollectMatches(const Document& doc, const std::vector<Pattern>& patterns,
                    std::size_t first_index, int threads, MatchReport& report) {
  auto results = ParallelMap<SentenceResult>(doc.sentences.size(), threads, [&](std::size_t i) {
    const DepGraph& graph = doc.sentences[i];
    SentenceResult r;
    r.sentence_index = first_index + i;
    r.source = doc.source_name;
    r.text = SentenceText(graph);
    for (const Pattern& p : patterns) {
      std::vector<ReportedMatch> matches;
      for (const Match& m : FindMatches(graph, p)) matches.push_back(Describe(graph, m));
      r.per_pattern.push_back(std::move(matches));
    }
    return r;
  });
  for (SentenceResult& r : results) {
    if (r.match_count() > 0) report.sentences.push_back(std::move(r));
  }
}

std::string RenderText(const MatchReport& report) {
  std::ostringstream out;
  const bool multi = report.patterns.size() > 1;
  for (const SentenceResult& s : report.sentences) {
    for (std::size_t p = 0; p < s.per_pattern.size(); ++p) {
      for (const ReportedMatch& m : s.per_pattern[p]) {
        out << "sent#" << s.sentence_index;
        if (multi) out << " pattern#" << p + 1;
        out << " anchor=" << m.anchor.id.ToString() << "(" << m.anchor.word << ")";
        for (const ReportedNode& n : m.nodes) {
          out << " " << n.name << "=" << n.id.ToString() << "(" << n.word << ")";
        }
        for (const ReportedEdge& e : m.edges) {
          out << " edge " << e.name << "=" << e.gov.ToString() << "->" << e.dep.ToString()
              << ":" << e.relation;
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

std::string RenderJson(const MatchReport& report) {
  ordered_json root;
  root["patterns"] = report.patterns;
  ordered_json sentences = ordered_json::array();
  for (const SentenceResult& s : report.sentences) {
    ordered_json js;
    js["sentenceIndex"] = s.sentence_index;
    js["source"] = s.source;
    js["text"] = s.text;
    ordered_json results = ordered_json::array();
    for (std::size_t p = 0; p < s.per_pattern.size(); ++p) {
      ordered_json jr;
      jr["pattern"] = p + 1;  // same numbering as pattern#K in text output
      ordered_json matches = ordered_json::array();
      for (const ReportedMatch& m : s.per_pattern[p]) {
        ordered_json jm;
        jm["anchor"] = NodeJson(m.anchor, false);
        ordered_json nodes = ordered_json::array();
        for (const ReportedNode& n : m.nodes) nodes.push_back(NodeJson(n, true));
        jm["nodes"] = std::move(nodes);
        ordered_json edges = ordered_json::array();
        for (const ReportedEdge& e : m.edges) {
          ordered_json je;
          je["name"] = e.name;
          je["gov"] = IdJson(e.gov);
          je["dep"] = IdJson(e.dep);
          je["reln"] = e.relation;
          edges.push_back(std::move(je));
        }
        jm["edges"] = std::move(edges);
        matches.push_back(std::move(jm));
      }
      jr["matches"] = std::move(matches);
      results.push_back(std::move(jr));
    }
    js["results"] = std::move(results);
    sentences.push_back(std::move(js));
  }
  root["sentences"] = std::move(sentences);
  root["totalMatches"] = report.total_matches();
  return root.dump(2) + "\n";
}

int RunCli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Search and rewrite dependency graphs in CoNLL-U files"};
  app.require_subcommand(1);

  std::string mode_name = "basic";
  int threads = 1;

  CLI::App* search = app.add_subcommand("search", "Print matches of Semgrex patterns");
  std::vector<std::string> pattern_texts, pattern_files, search_inputs;
  std::string format = "text";
  bool quiet = false;
  // One value per flag, so trailing positionals stay inputs.
  search->add_option("-p,--pattern", pattern_texts, "Pattern text (repeatable)")
      ->allow_extra_args(false);
  search->add_option("--pattern-file", pattern_files,
                     "File of patterns separated by blank lines")
      ->allow_extra_args(false);
  search->add_option("--mode", mode_name, "basic or enhanced")
      ->check(CLI::IsMember({"basic", "enhanced"}));
  search->add_option("--format", format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  search->add_flag("-q,--quiet", quiet, "Print match counts only");
  search->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  search->add_option("inputs", search_inputs, "CoNLL-U files (default: standard input)");

  CLI::App* rewrite = app.add_subcommand("rewrite", "Apply Ssurgeon rules");
  std::string rules_path;
  std::vector<std::string> rewrite_inputs;
  bool emit_report = false;
  bool in_place = false;
  std::int64_t cap = 0;
  rewrite->add_option("-r,--rules", rules_path, "Rule file")->required();
  rewrite->add_option("--mode", mode_name, "basic or enhanced")
      ->check(CLI::IsMember({"basic", "enhanced"}));
  rewrite->add_flag("--report", emit_report, "Write per-sentence changes to stderr");
  rewrite->add_flag("-i,--in-place", in_place, "Rewrite input files in place");
  rewrite->add_option("--iteration-cap", cap,
                      "Maximum changing iterations per rule and sentence");
  rewrite->add_option("inputs", rewrite_inputs, "CoNLL-U files (default: standard input)");

  std::vector<const char*> argv;
  argv.push_back("semgrex");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  GraphMode mode = *ParseGraphMode(mode_name);
  try {
    if (*search) {
      return Search(pattern_texts, pattern_files, search_inputs, mode, format, quiet,
                    threads, in, out);
    }
    return Rewrite(rules_path, rewrite_inputs, mode, emit_report, in_place, cap, in, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace semgrex
