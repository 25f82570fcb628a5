"""A fixed 20-pair evaluation corpus with hand-written partial overlaps.

The expected corpus scores are pinned in the acceptance suite; any change
to these texts invalidates those constants, so treat this file as frozen.
"""

PAIRS = [
    (
        "p01",
        "The painting shows a quiet harbor at dawn with small fishing boats.",
        ["The painting shows a quiet harbor at dawn with small fishing boats."],
    ),
    (
        "p02",
        "A woman in a blue dress reads a letter by the window.",
        [
            "A young woman wearing a blue dress reads a letter near the window.",
            "By the window a woman in blue reads a private letter.",
        ],
    ),
    (
        "p03",
        "The artist painted peasants working in a golden wheat field.",
        ["Peasants harvest golden wheat under a heavy summer sky."],
    ),
    (
        "p04",
        "Dramatic light falls across the saint's upturned face.",
        ["The saint's face is lit by a single dramatic beam of light."],
    ),
    (
        "p05",
        "This portrait celebrates the wealth of a merchant family.",
        [
            "The portrait displays the wealth and standing of a merchant family.",
            "A rich merchant family commissioned this formal portrait.",
        ],
    ),
    (
        "p06",
        "Storm clouds gather over a lonely windmill on the plain.",
        ["A lonely windmill stands on the plain beneath gathering storm clouds."],
    ),
    (
        "p07",
        "The fresco depicts the founding myth of the city.",
        ["The ceiling fresco narrates the founding myth of the ancient city."],
    ),
    (
        "p08",
        "Bright impasto strokes capture the energy of the dance hall.",
        ["Thick impasto strokes capture the noisy energy of a dance hall."],
    ),
    (
        "p09",
        "A dead pheasant and ripe fruit rest on a marble table.",
        [
            "Ripe fruit and a dead pheasant lie arranged on a marble table.",
            "The still life sets game and fruit on cold marble.",
        ],
    ),
    (
        "p10",
        "The sitter's gaze follows the viewer across the room.",
        ["Her steady gaze seems to follow the viewer around the room."],
    ),
    (
        "p11",
        "Fishermen haul their nets against a violent green sea.",
        ["Against a violent green sea the fishermen haul heavy nets."],
    ),
    (
        "p12",
        "Gold leaf surrounds the enthroned madonna and child.",
        ["The enthroned madonna and child are framed in brilliant gold leaf."],
    ),
    (
        "p13",
        "The battle scene glorifies the young general's victory.",
        [
            "This vast battle scene glorifies the victory of the young general.",
            "The canvas celebrates a general's triumph in battle.",
        ],
    ),
    (
        "p14",
        "Soft pastel tones give the ballet rehearsal a dreamlike air.",
        ["Soft pastel tones lend the rehearsal room a dreamlike quality."],
    ),
    (
        "p15",
        "An allegory of time shows an old man with a scythe and hourglass.",
        ["Time appears as an old man holding a scythe and an hourglass."],
    ),
    (
        "p16",
        "The winter landscape hums with skaters on the frozen river.",
        ["Skaters crowd the frozen river in this lively winter landscape."],
    ),
    (
        "p17",
        "Harsh electric light exposes the cafe's late night loneliness.",
        ["Late night loneliness fills the cafe under harsh electric light."],
    ),
    (
        "p18",
        "The triptych folds open to reveal a garden of strange delights.",
        [
            "Opened, the triptych reveals a strange garden of earthly delights.",
            "A garden of strange delights fills the opened triptych.",
        ],
    ),
    (
        "p19",
        "Muted grays and browns record the factory district at dusk.",
        ["The factory district at dusk is recorded in muted grays and browns."],
    ),
    (
        "p20",
        "A self portrait shows the painter with palette and steady eyes.",
        ["In this self portrait the painter holds a palette and meets our eyes."],
    ),
]
