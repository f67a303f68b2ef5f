#pragma once

// Shared inputs for the parser, metrics and acceptance suites.

namespace fixtures {

// The canonical two-scene coffee-shop example, fenced the way a model would
// emit it.
inline constexpr const char* kCoffeeShopSnippet = R"(```xml
<script>
  <scene>
    <stage_direction>INT. COFFEE SHOP - DAY</stage_direction>
    <scene_description>The coffee shop is bustling. ANNA (30s), dressed in a sharp business suit, sips her latte, looking impatient. MARK (30s), disheveled and out of breath, rushes in.</scene_description>
    <character>MARK</character>
    <dialogue>Sorry I'm late! The traffic was insane.</dialogue>
    <character>ANNA</character>
    <parenthetical>(glancing at her watch)</parenthetical>
    <dialogue>Insane or you overslept?</dialogue>
    <scene_description>Mark pulls out a chair and slumps into it, running a hand through his messy hair. He looks exhausted.</scene_description>
    <character>MARK</character>
    <dialogue>Okay, a bit of both. But mostly insane traffic.</dialogue>
  </scene>
  <scene>
    <stage_direction>EXT. PARK - LATER</stage_direction>
    <scene_description>Sunlight dapples through the trees. Anna and Mark walk along a paved path, a little more relaxed now.</scene_description>
    <character>ANNA</character>
    <dialogue>So, about the Henderson account... We need a new strategy.</dialogue>
  </scene>
</script>
```)";

// Free prose: no tags, no cue lines, no INT./EXT. keywords, no double blank
// lines, so the fallback parser sees a single scene with zero turns.
inline constexpr const char* kTagFreeProse =
    "Once there was a town at the edge of the water where nothing much happened.\n"
    "People walked to the market in the morning and walked home in the evening.\n"
    "A stranger arrived one day and asked for a room above the bakery.\n"
    "Nobody thought to ask where the stranger had come from or what was wanted.\n";

}  // namespace fixtures
