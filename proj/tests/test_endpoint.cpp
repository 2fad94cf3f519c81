#include <doctest.h>

#include "osfp/encoding.hpp"
#include "osfp/endpoint.hpp"
#include "osfp/signature.hpp"
#include "support.hpp"

using namespace osfp;

TEST_CASE("fresh Windows 2000 dump has 3 programs and 8 bindings") {
    const auto map = parse_endpoint_dump(read_text(data_path("win2000-pro-sp0.dump")));
    REQUIRE(map.programs.size() == 3);
    CHECK(map.binding_count() == 8);
    CHECK(map.programs[0].uuid == "5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC");
    CHECK(map.programs[0].annotation == "Messenger Service");
    CHECK(map.programs[0].bindings.size() == 4);
    CHECK(map.programs[0].bindings[1] == Binding{"ncacn_np", "\\PIPE\\ntsvcs"});
    CHECK_FALSE(map.programs[0].bindings[3].endpoint.has_value());
    CHECK_FALSE(map.programs[1].annotation.has_value());
}

TEST_CASE("line format round trip") {
    const auto map = parse_endpoint_dump(read_text(data_path("win2000-pro-sp0.dump")));
    const auto text = serialize_endpoint_dump(map);
    CHECK(parse_endpoint_dump(text) == map);
}

TEST_CASE("uuids are upper-cased and validated") {
    const auto map = parse_endpoint_dump("uuid 5a7b91f8-ff00-11d0-a9b2-00c04fb6e6fc\n  binding ncalrpc x\n");
    CHECK(map.programs[0].uuid == "5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC");
    CHECK(is_uuid("5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC"));
    CHECK_FALSE(is_uuid("5A7B91F8-FF00-11D0-A9B2-00C04FB6E6F"));
    CHECK_FALSE(is_uuid("5A7B91F8FF00-11D0-A9B2-00C04FB6E6FC0"));
}

TEST_CASE("malformed dumps") {
    CHECK_THROWS_AS(parse_endpoint_dump("uuid nothex\n  binding ncalrpc\n"), ParseError);
    CHECK_THROWS_AS(parse_endpoint_dump("  binding ncalrpc x\n"), ParseError);
    CHECK_THROWS_AS(parse_endpoint_dump("uuid 5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC\n"), ParseError);
    CHECK_THROWS_AS(parse_endpoint_dump("frob\n"), ParseError);
    CHECK_THROWS_AS(parse_endpoint_dump("uuid=\"5A7B91F8-FF00-11D0-A9B2-00C04FB6E6FC\n"), ParseError);
}

TEST_CASE("schema and encoding") {
    EndpointMap a;
    a.programs.push_back({"00000000-0000-0000-0000-000000000001", std::nullopt, {{"ncalrpc", "x"}, {"ncacn_ip_tcp", {}}}});
    EndpointMap b;
    b.programs.push_back({"00000000-0000-0000-0000-000000000002", std::nullopt, {{"ncalrpc", "y"}}});
    b.programs.push_back({"00000000-0000-0000-0000-000000000001", std::nullopt, {{"ncalrpc", "x"}}});
    const auto schema = build_endpoint_schema({a, b});
    // uuid1, uuid1/x, uuid1/tcp, uuid2, uuid2/y
    CHECK(schema.total == 5);
    CHECK(schema.uuid_neurons.at("00000000-0000-0000-0000-000000000002") == 3);

    const Eigen::VectorXd va = encode_endpoint_map(a, schema);
    CHECK(va == (Eigen::VectorXd(5) << 1, 1, 1, -1, -1).finished());
    const Eigen::VectorXd vb = encode_endpoint_map(b, schema);
    CHECK(vb == (Eigen::VectorXd(5) << 1, 1, -1, 1, 1).finished());

    EndpointMap unknown;
    unknown.programs.push_back({"00000000-0000-0000-0000-000000000001", std::nullopt, {{"ncacn_np", "\\PIPE\\z"}}});
    const Eigen::VectorXd vu = encode_endpoint_map(unknown, schema);
    CHECK(vu == (Eigen::VectorXd(5) << 1, -1, -1, -1, -1).finished());

    CHECK_THROWS_AS(build_endpoint_schema({}), std::invalid_argument);
}
