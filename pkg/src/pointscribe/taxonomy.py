"""Scene taxonomy and the default annotation prompt sets.

The taxonomy is the closed list of scene subcategories a 3D asset may be
tagged with: 50 subcategories partitioned into 7 categories, each category
entirely indoor or entirely outdoor.
"""
from __future__ import annotations

from enum import Enum


class Site(str, Enum):
    INDOOR = "INDOOR"
    OUTDOOR = "OUTDOOR"


# category -> (site, subcategories)
SCENE_TAXONOMY: dict[str, tuple[Site, tuple[str, ...]]] = {
    "Home": (
        Site.INDOOR,
        (
            "Bedroom",
            "Living Room",
            "Kitchen",
            "Dining Room",
            "Study Room",
            "Bathroom",
            "Children's Room",
            "Balcony",
        ),
    ),
    "Work Space": (
        Site.INDOOR,
        (
            "Office",
            "Meeting Room",
            "Library",
            "Study Hall",
            "Classroom",
            "Laboratory",
            "Recording Studio",
            "Hospital Ward",
        ),
    ),
    "Commercial Space": (
        Site.INDOOR,
        (
            "Coffee Shop",
            "Restaurant",
            "Supermarket",
            "Bar",
            "Bookstore",
            "Indoor Market",
            "Hair Salon",
            "Clinic",
        ),
    ),
    "Public Space": (
        Site.INDOOR,
        (
            "Museum",
            "Church",
            "Theater",
            "Music Room",
            "Activity Room",
            "Indoor Workshop",
            "Indoor Flower Exhibition Hall",
            "Gym",
        ),
    ),
    "Nature": (
        Site.OUTDOOR,
        (
            "Beach",
            "Forest Camping Site",
            "Garden",
            "Mountain Cabin",
            "Desert Oasis",
            "Lake Side",
        ),
    ),
    "Urban Space": (
        Site.OUTDOOR,
        (
            "Amusement Park",
            "City Square",
            "Bus Terminal",
            "Rooftop Viewpoint",
            "School Playground",
            "Pedestrian Street",
        ),
    ),
    "Rural": (
        Site.OUTDOOR,
        (
            "Farmland",
            "Ranch",
            "Fishing Village Dock",
            "Mountain Village",
            "Marketplace",
            "Orchard",
        ),
    ),
}

CATEGORIES: tuple[str, ...] = tuple(SCENE_TAXONOMY)

SUBCATEGORIES: tuple[str, ...] = tuple(
    sub for _, (_, subs) in SCENE_TAXONOMY.items() for sub in subs
)

_SUBCATEGORY_INDEX: dict[str, tuple[str, Site]] = {
    sub: (category, site)
    for category, (site, subs) in SCENE_TAXONOMY.items()
    for sub in subs
}


def subcategory_info(subcategory: str) -> tuple[str, Site]:
    """Return (category, site) for a subcategory; KeyError if unknown."""
    return _SUBCATEGORY_INDEX[subcategory]


def is_subcategory(name: str) -> bool:
    return name in _SUBCATEGORY_INDEX


# Default question sets shown to annotators. 2D image tasks use one of the
# two image profiles; 3D scene tasks use the nine scene questions.

IMAGE_PROMPTS_PART_A: tuple[str, ...] = (
    "What is the image at first glance?",
    "What are the objects and their counts?",
    "What does the text say?",
    "What are the positions of the objects?",
    "What subtle details are noticeable?",
    "What is in the background?",
    "What is the style and color?",
    "Is there any contextual information such as location that might help to "
    "understand the image?",
    "Is there anything that can be inferred from the image?",
    "Is this image culturally distinct? If yes, please explain why you think "
    "this image is culturally distinct.",
)

IMAGE_PROMPTS_PART_B: tuple[str, ...] = (
    "What is your initial impression of the image? Describe what you see.",
    "What text content, if any, is present in the image?",
    "Are there any subtle details or nuances that stand out to you?",
    "What elements or features are present in the background?",
    "Does this image evoke any emotions?",
    "Can you identify a specific country, region, or community this image "
    "likely comes from?",
    "Is this object, activity, or setting known by different names or "
    "represented differently in other regions or dialects?",
    "Are there any common misconceptions about the contents of this image?",
)

SCENE_PROMPTS_3D: tuple[str, ...] = (
    "What type of room or space is this? What is the primary function or "
    "purpose of this scene?",
    "Count and identify all the objects visible in the scene. (Note: Similar "
    "objects can be grouped together even if they differ in style, e.g., you "
    'can say "two chairs" for chairs of different styles. However, please '
    "describe objects separately even if they were combined as individual "
    'objects earlier, e.g., count "bowl" and "spoon" separately rather than '
    'as "bowl with spoon".)',
    "Which objects in this scene naturally work together or form functional "
    "groups? For each group, explain how someone would naturally use these "
    'objects in order. e.g. "A person would first turn on the lamp, then sit '
    'down on chairand open the book."',
    "What unreasonable aspects can you find in the scene? If there are none, "
    "please state so.",
    "After removing the ground plane from the scene, which object is "
    "positioned in the center of the scene?",
    "If you are standing at the center object you mentioned, describe 1) what "
    "objects you would see. Use position words such as in front of, to the "
    "right, etc. 2) measuring from the closest point of each object, which "
    "objects would be closest/farthest to you. 3) which objects are "
    "larger/smaller than the center object. (Format: If I am standing at "
    "[object] and facing [object], I would see ...)",
    "After removing the ground plane from the scene, what objects are located "
    "at the corners of the scene?",
    "If you are standing at one of the corner objects you mentioned, describe "
    "1) what objects you would see. Use position words such as in front of, "
    "to the right, etc. 2) measuring from the closest point of each object, "
    "which objects would be closest/farthest to you. 3) which objects are "
    "larger/smaller than the center object. (Format: If I am standing at "
    "[object] and facing [object], I would see ...)",
    "If you are in the scene, are there any objects that are completely or "
    "partially hidden from certain viewing angles? Describe the situation in "
    "detail. (Format: If I stand/sit/kneel/... at [object], facing [object], "
    "I can not see ..., because ...)",
)
