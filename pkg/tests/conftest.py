import json

import pytest
from hypothesis import strategies as st

from thermomap.geometry import Room, RoomKind


def make_room(
    room_id="r0",
    min_corner=(0.0, 0.0, 0.0),
    max_corner=(4.0, 4.0, 3.0),
    level=0,
    kind=RoomKind.OTHER,
):
    return Room(
        id=room_id, level=level, min_corner=min_corner, max_corner=max_corner, kind=kind
    )


def single_room_config(min_corner=(0.0, 0.0, 0.0), max_corner=(4.0, 4.0, 3.0)):
    return json.dumps(
        {
            "building": {
                "id": "one-room",
                "levels": [
                    {
                        "index": 0,
                        "rooms": [
                            {
                                "id": "r0",
                                "min": list(min_corner),
                                "max": list(max_corner),
                                "kind": "other",
                            }
                        ],
                    }
                ],
            }
        }
    )


def grid_building_config(
    building_id="grid",
    levels=1,
    rooms_x=2,
    rooms_y=2,
    room_size=(4.0, 4.0, 3.0),
):
    """levels × (rooms_x·rooms_y) rooms tiled without gaps."""
    sx, sy, sz = room_size
    level_list = []
    for lv in range(levels):
        rooms = []
        for j in range(rooms_y):
            for i in range(rooms_x):
                rooms.append(
                    {
                        "id": f"L{lv}-r{j}{i}",
                        "min": [i * sx, j * sy, lv * sz],
                        "max": [(i + 1) * sx, (j + 1) * sy, (lv + 1) * sz],
                        "kind": "other",
                    }
                )
        level_list.append({"index": lv, "rooms": rooms})
    return json.dumps({"building": {"id": building_id, "levels": level_list}})


@pytest.fixture
def residential_config():
    return grid_building_config(building_id="house", levels=1, rooms_x=2, rooms_y=2)


@pytest.fixture
def commercial_config():
    return grid_building_config(building_id="tower", levels=6, rooms_x=2, rooms_y=2)


def rooms_strategy():
    coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
    extent = st.floats(0.5, 20, allow_nan=False, allow_infinity=False)
    return st.builds(
        lambda mn, ext: make_room(
            min_corner=mn,
            max_corner=(mn[0] + ext[0], mn[1] + ext[1], mn[2] + ext[2]),
        ),
        st.tuples(coord, coord, coord),
        st.tuples(extent, extent, extent),
    )
