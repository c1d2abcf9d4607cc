#include "doctest.h"
#include "gearnet/manifest.hpp"
#include "gearnet/serialize.hpp"

#include <filesystem>

using namespace gearnet;

TEST_SUITE("serialize") {

TEST_CASE("GSTK1 byte layout") {
    const std::string bytes = encode_gstk({{"a", Tensor::vector({1.0})}});
    // magic, name length, name, rank, one dim, one double
    CHECK(bytes.size() == 5 + 4 + 1 + 4 + 4 + 8);
    CHECK(bytes.substr(0, 5) == "GSTK1");
    CHECK(bytes[5] == 1);
    CHECK(bytes[9] == 'a');
    // 1.0 little-endian: 00 .. 00 f0 3f
    CHECK(static_cast<unsigned char>(bytes.back()) == 0x3f);
    CHECK(static_cast<unsigned char>(bytes[bytes.size() - 2]) == 0xf0);
}

TEST_CASE("round trip and corrupt input") {
    NamedTensors rec = {{"w", Tensor::matrix({{1.5, -2}, {3, 1e-300}})}, {"b", Tensor({2, 1, 3}, 7.0)}};
    CHECK(decode_gstk(encode_gstk(rec)) == rec);
    const std::string bytes = encode_gstk(rec);
    CHECK_THROWS_AS(decode_gstk(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(decode_gstk("GSTK2"), FormatError);
    CHECK_THROWS_AS(decode_gstk(bytes + "x"), FormatError);
    CHECK(text_from_record(text_record("a=1\nb=2\n")) == "a=1\nb=2\n");
}

TEST_CASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "gearnet_serialize_test.gstk";
    save_gstk(path, {{"x", Tensor({3}, 2.0)}});
    CHECK(load_gstk(path).front().second == Tensor({3}, 2.0));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_gstk(path), IoError);
}

TEST_CASE("key-value text and checksums") {
    const KeyValues kv = {{"a", "1"}, {"b", "x y"}};
    CHECK(format_key_values(kv) == "a=1\nb=x y\n");
    CHECK(parse_key_values("# note\n\na=1\nb=x y\n") == kv);
    CHECK_THROWS(parse_key_values("novalue\n"));
    // FNV-1a 64 of the empty string and of "a"
    CHECK(checksum("") == "cbf29ce484222325");
    CHECK(checksum("a") == "af63dc4c8601ec8c");
}

TEST_CASE("atomic writes leave no temporary files") {
    const auto dir = std::filesystem::temp_directory_path() / "gearnet_atomic_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "out.txt", "one");
    write_file_atomic(dir / "out.txt", "two");
    CHECK(read_file(dir / "out.txt") == "two");
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
    CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "x.txt", "z"), IoError);

    RunManifest m;
    m.command = "test";
    m.outputs = {{"file", (dir / "out.txt").string()}};
    m.write(dir / "manifest.txt");
    const auto kv = to_map(parse_key_values(read_file(dir / "manifest.txt")));
    CHECK(kv.at("command") == "test");
    bool has_checksum = false;
    for (const auto& [k, v] : kv) has_checksum |= v == checksum("two");
    CHECK(has_checksum);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
