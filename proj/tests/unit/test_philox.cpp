#include <doctest.h>

#include "ehaloha/philox.hpp"

using namespace ehaloha;

TEST_CASE("philox4x32-10 known answers")
{
    using philox::Counter;
    CHECK(philox::generate({0, 0, 0, 0}, {0, 0})
          == Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                           {0xffffffff, 0xffffffff})
          == Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                           {0xa4093822, 0x299f31d0})
          == Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("generate is usable at compile time")
{
    constexpr auto out = philox::generate({1, 2, 3, 4}, {5, 6});
    static_assert(out[0] != 1 || out[1] != 2);
    CHECK(out == philox::generate({1, 2, 3, 4}, {5, 6}));
}

TEST_CASE("mix64 spreads adjacent inputs")
{
    CHECK(mix64(0) != mix64(1));
    CHECK(mix64(0) == 0xE220A8397B1DCDAFull);
}
