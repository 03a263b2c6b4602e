#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semmap/errors.hpp"
#include "semmap/network.hpp"
#include "semmap/report.hpp"
#include "semmap/svg.hpp"
#include "support/helpers.hpp"

using namespace semmap;
using nlohmann::json;

namespace {

// four-word corpus with distinct column directions: pairwise cosines sit
// near 0.62, so tau = 0.25 keeps a 4-cycle and tau = 0.99 isolates everything
const char* kSmallCorpus =
    "alpha alpha alpha beta delta\n"
    "\n"
    "alpha beta beta gamma\n"
    "\n"
    "beta gamma gamma gamma delta\n"
    "\n"
    "alpha gamma delta delta\n";

PipelineConfig small_config(const std::filesystem::path& input,
                            const std::filesystem::path& out_dir) {
    PipelineConfig cfg;
    cfg.input = input.string();
    cfg.min_frequency = 2;
    cfg.tau = 0.4;  // keeps the 4-cycle (cosine .6155), drops both chords
    cfg.num_factors = 2;
    cfg.num_topics = 2;
    cfg.sweeps = 40;
    cfg.seed = 11;
    cfg.top_k = 4;
    cfg.out_dir = out_dir.string();
    return cfg;
}

Report sample_report() {
    Report r;
    r.corpus = {4, 18, 4, 4, 4};
    r.network = {4, 4, 0, 2, 0.25, false, 0.25};
    r.factors.explained_variance = 0.81;
    r.factors.ss_loadings = {1.9, 1.3};
    r.factors.top_loadings = {{{"alpha", 0.93}, {"beta", -0.41}},
                              {{"gamma", 0.88}}};
    r.topics = {{0, {{"alpha", 0.5}, {"beta", 0.25}}}, {1, {{"gamma", 0.6}}}};
    r.perplexity = 3.7;
    r.word_level = {{5.2, 1, 0.02, 0.7}, 4, 5, ""};
    r.document_level = {{0.0, 1, 1.0, 0.0}, 0, 0, "degenerate"};
    r.files = {"report.json"};
    r.provenance = {"0011aabbccddeeff", 11, "0.1.0"};
    return r;
}

// minimal structural validator: enough of JSON Schema for the shipped file
void check_schema(const json& schema, const json& value, const json& root,
                  const std::string& where) {
    if (schema.contains("$ref")) {
        const std::string ref = schema.at("$ref").get<std::string>();
        REQUIRE(ref.rfind("#/definitions/", 0) == 0);
        check_schema(root.at("definitions").at(ref.substr(14)), value, root, where);
        return;
    }
    const std::string type = schema.at("type").get<std::string>();
    INFO(where << " should be a " << type);
    if (type == "object") {
        REQUIRE(value.is_object());
        if (schema.contains("required"))
            for (const auto& key : schema.at("required")) {
                INFO(where << " misses " << key.get<std::string>());
                REQUIRE(value.contains(key.get<std::string>()));
            }
        if (schema.contains("properties"))
            for (const auto& [key, sub] : schema.at("properties").items())
                if (value.contains(key))
                    check_schema(sub, value.at(key), root, where + "." + key);
    } else if (type == "array") {
        REQUIRE(value.is_array());
        if (schema.contains("items")) {
            std::size_t i = 0;
            for (const auto& item : value)
                check_schema(schema.at("items"), item, root,
                             where + "[" + std::to_string(i++) + "]");
        }
    } else if (type == "integer") {
        REQUIRE(value.is_number_integer());
    } else if (type == "number") {
        REQUIRE(value.is_number());
    } else if (type == "string") {
        REQUIRE(value.is_string());
    } else if (type == "boolean") {
        REQUIRE(value.is_boolean());
    } else {
        FAIL("unhandled schema type " << type);
    }
}

struct CerrMute {
    std::ostringstream sink;
    std::streambuf* old;
    CerrMute() : old(std::cerr.rdbuf(sink.rdbuf())) {}
    ~CerrMute() { std::cerr.rdbuf(old); }
    std::string text() const { return sink.str(); }
};

// all circle centers of an SVG, in document order
std::vector<std::pair<double, double>> circle_centers(const std::string& svg) {
    std::vector<std::pair<double, double>> out;
    const std::regex circle("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle);
         it != std::sregex_iterator(); ++it)
        out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
    return out;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("config text serialization round-trips every field") {
    PipelineConfig cfg;
    cfg.input = "corpus.txt";
    cfg.split = SplitMode::file_per_doc;
    cfg.stopwords = "stop.txt";
    cfg.min_frequency = 4;
    cfg.filter_order = FilterOrder::frequency_then_stopwords;
    cfg.tau = 0.15;
    cfg.num_factors = 3;
    cfg.num_topics = 7;
    cfg.alpha = 0.125;
    cfg.beta = 0.02;
    cfg.sweeps = 250;
    cfg.seed = 987654321;
    cfg.top_k = 12;
    cfg.out_dir = "results";
    cfg.format = "text";

    test_support::TempDir tmp("config");
    save_config(cfg, tmp.file("run.cfg"));
    const PipelineConfig back = load_config(tmp.file("run.cfg"));

    CHECK(config_to_text(back) == config_to_text(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(back.split == SplitMode::file_per_doc);
    CHECK(back.filter_order == FilterOrder::frequency_then_stopwords);
    CHECK(back.tau == cfg.tau);
    CHECK(back.seed == cfg.seed);
}

TEST_CASE("config parser tolerates comments and rejects junk") {
    test_support::TempDir tmp("config_junk");
    const auto ok = test_support::write_file(tmp.file("ok.cfg"),
                                             "# a comment\n"
                                             "\n"
                                             "tau = 0.3   # trailing note\n"
                                             "  seed=42\n");
    const PipelineConfig cfg = load_config(ok);
    CHECK(cfg.tau == doctest::Approx(0.3));
    CHECK(cfg.seed == 42);
    CHECK(cfg.min_frequency == 3);  // untouched keys keep their defaults

    CHECK_THROWS_AS(
        load_config(test_support::write_file(tmp.file("k.cfg"), "taus = 0.3\n")),
        DataError);
    CHECK_THROWS_AS(
        load_config(test_support::write_file(tmp.file("v.cfg"), "tau = fast\n")),
        DataError);
    CHECK_THROWS_AS(
        load_config(test_support::write_file(tmp.file("l.cfg"), "just words\n")),
        DataError);
    CHECK_THROWS_AS(
        load_config(test_support::write_file(tmp.file("s.cfg"), "split = pages\n")),
        DataError);
    CHECK_THROWS_AS(load_config(tmp.file("missing.cfg")), DataError);
}

TEST_CASE("config hash separates configs and ignores nothing") {
    PipelineConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.tau = 0.2000000001;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("report json round-trips through parse and re-serialize") {
    const Report r = sample_report();
    const std::string text = report_to_json(r);
    const Report back = report_from_json(text);
    CHECK(report_to_json(back) == text);

    CHECK_THROWS_AS(report_from_json("not json"), DataError);
    CHECK_THROWS_AS(report_from_json("{}"), DataError);
}

TEST_CASE("report json validates against the shipped schema") {
    const json schema =
        json::parse(test_support::read_file(test_support::data_dir() / "report.schema.json"));
    const json parsed = json::parse(report_to_json(sample_report()));
    check_schema(schema, parsed, schema, "report");
}

TEST_CASE("text rendering carries the topic table and key statistics") {
    const std::string text = report_to_text(sample_report());
    CHECK(text.find("topic | words") != std::string::npos);
    CHECK(text.find("1 | alpha beta") != std::string::npos);
    CHECK(text.find("modularity") != std::string::npos);
    CHECK(text.find("perplexity") != std::string::npos);
    CHECK(text.find("degenerate") != std::string::npos);  // skipped comparison note
}

TEST_CASE("pipeline runs end to end and the report matches the artifacts") {
    test_support::TempDir tmp("pipeline");
    test_support::write_file(tmp.file("corpus.txt"), kSmallCorpus);
    const PipelineConfig cfg = small_config(tmp.file("corpus.txt"), tmp.file("out"));

    CerrMute mute;  // small tables trip sparse-cell warnings
    const Report report = run_pipeline(cfg);

    CHECK(report.corpus.documents == 4);
    CHECK(report.corpus.vocabulary_size == 4);
    CHECK(report.network.nodes == 4);
    CHECK(report.network.edges == 4);  // the 4-cycle survives tau = 0.4
    CHECK_FALSE(report.network.fully_isolated);
    CHECK(report.topics.size() == 2);
    CHECK(report.perplexity >= 1.0);
    CHECK(report.provenance.config_hash == config_hash(cfg));

    // every artifact the report names exists on disk
    for (const auto& name : report.files)
        CHECK(std::filesystem::exists(tmp.file("out") / name));

    // the emitted JSON equals the returned report and validates
    const std::string emitted =
        test_support::read_file(tmp.file("out") / "report.json");
    CHECK(emitted == report_to_json(report));
    const json schema = json::parse(
        test_support::read_file(test_support::data_dir() / "report.schema.json"));
    check_schema(schema, json::parse(emitted), schema, "report");

    // recorded Q is reproducible from the exported partition files
    const auto clusters =
        import_partition_pajek(tmp.file("out") / "map.net", tmp.file("out") / "map.clu");
    CHECK(clusters.size() == report.network.nodes);
}

TEST_CASE("identical configs give byte-identical reports and maps") {
    test_support::TempDir tmp("determinism");
    test_support::write_file(tmp.file("corpus.txt"), kSmallCorpus);
    const PipelineConfig cfg = small_config(tmp.file("corpus.txt"), tmp.file("out"));

    CerrMute mute;
    run_pipeline(cfg);
    const std::string json_a = test_support::read_file(tmp.file("out") / "report.json");
    const std::string svg_a = test_support::read_file(tmp.file("out") / "map.svg");
    const std::string txt_a = test_support::read_file(tmp.file("out") / "report.txt");
    run_pipeline(cfg);
    CHECK(test_support::read_file(tmp.file("out") / "report.json") == json_a);
    CHECK(test_support::read_file(tmp.file("out") / "map.svg") == svg_a);
    CHECK(test_support::read_file(tmp.file("out") / "report.txt") == txt_a);
}

TEST_CASE("a threshold above every similarity flags full isolation") {
    test_support::TempDir tmp("isolated");
    test_support::write_file(tmp.file("corpus.txt"), kSmallCorpus);
    PipelineConfig cfg = small_config(tmp.file("corpus.txt"), tmp.file("out"));
    cfg.tau = 0.99;

    CerrMute capture;
    const Report report = run_pipeline(cfg);
    CHECK(report.network.fully_isolated);
    CHECK(report.network.edges == 0);
    CHECK(report.network.isolates == report.network.nodes);
    CHECK(report.network.modularity_q == 0.0);
    CHECK(report.network.communities == static_cast<int>(report.network.nodes));
    CHECK(capture.text().find("no edges") != std::string::npos);
    // the word-level comparison degenerates to a note, not an error
    CHECK_FALSE(report.word_level.note.empty());
}

TEST_CASE("pipeline errors carry their stage name") {
    PipelineConfig cfg;
    cfg.input = "/nonexistent/corpus.txt";
    CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("ingest:"), DataError);

    PipelineConfig empty;
    empty.input = "";
    CHECK_THROWS_WITH_AS(run_pipeline(empty), doctest::Contains("ingest:"), DataError);
}

TEST_CASE("svg map renders a single node as one labeled circle") {
    CowordNetwork net;
    net.nodes = {{"alpha", 3}};
    net.tau = 0.2;
    Partition part;
    part.assignment = {0};

    test_support::TempDir tmp("svg_one");
    emit_svg_map(net, part, 7, tmp.file("one.svg"));
    const std::string svg = test_support::read_file(tmp.file("one.svg"));
    CHECK(circle_centers(svg).size() == 1);
    CHECK(svg.find(">alpha</text>") != std::string::npos);
}

TEST_CASE("svg map is byte-stable and separates disjoint components") {
    CowordNetwork net;
    for (int i = 0; i < 6; ++i)
        net.nodes.push_back({"w" + std::to_string(i), 2});
    net.edges = {{0, 1, 0.9}, {1, 2, 0.9}, {0, 2, 0.9},
                 {3, 4, 0.9}, {4, 5, 0.9}, {3, 5, 0.9}};
    net.tau = 0.1;
    const Partition part = louvain_partition(net);
    REQUIRE(part.num_communities() == 2);

    test_support::TempDir tmp("svg_two");
    emit_svg_map(net, part, 3, tmp.file("a.svg"));
    emit_svg_map(net, part, 3, tmp.file("b.svg"));
    const std::string svg = test_support::read_file(tmp.file("a.svg"));
    CHECK(svg == test_support::read_file(tmp.file("b.svg")));

    const auto centers = circle_centers(svg);
    REQUIRE(centers.size() == 6);
    // bounding boxes of the two triangles must not overlap
    double ax0 = 1e9, ax1 = -1e9, ay0 = 1e9, ay1 = -1e9;
    double bx0 = 1e9, bx1 = -1e9, by0 = 1e9, by1 = -1e9;
    for (int i = 0; i < 3; ++i) {
        ax0 = std::min(ax0, centers[i].first);
        ax1 = std::max(ax1, centers[i].first);
        ay0 = std::min(ay0, centers[i].second);
        ay1 = std::max(ay1, centers[i].second);
    }
    for (int i = 3; i < 6; ++i) {
        bx0 = std::min(bx0, centers[i].first);
        bx1 = std::max(bx1, centers[i].first);
        by0 = std::min(by0, centers[i].second);
        by1 = std::max(by1, centers[i].second);
    }
    const bool separated = ax1 < bx0 || bx1 < ax0 || ay1 < by0 || by1 < ay0;
    CHECK(separated);

    // the two communities use different palette colors
    const std::regex fill("<circle[^>]*fill=\"(#[0-9a-fA-F]{6})\"");
    std::vector<std::string> fills;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill);
         it != std::sregex_iterator(); ++it)
        fills.push_back((*it)[1]);
    REQUIRE(fills.size() == 6);
    CHECK(fills[0] == fills[1]);
    CHECK(fills[0] == fills[2]);
    CHECK(fills[3] == fills[4]);
    CHECK(fills[0] != fills[3]);
}

}  // TEST_SUITE
