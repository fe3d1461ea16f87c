"""Regenerate the canonical .skill files for the builtin library.

Run from the repo root: python scripts/gen_seed_skills.py
The emitted files are the single source of truth loaded by lyra.tasklib.
"""

from __future__ import annotations

from pathlib import Path

from lyra.skillscript import format_program, parse

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "lyra" / "tasklib" / "skills"

SOURCES: dict[str, str] = {}

SOURCES["get_blocks_by_color"] = '''
skill get_blocks_by_color(color: string = "") doc "Retrieves all block objects in the workspace. If a specific color is provided, only blocks of that color are retrieved." {
    let all_objects = get_objects()
    let blocks = []
    for obj in all_objects {
        if obj.type == "block" or obj.type == "plate" {
            if color == "" or obj.color == color {
                blocks = append(blocks, obj)
            }
        }
    }
    return blocks
}
'''

SOURCES["identify_roof_tiles"] = '''
skill identify_roof_tiles(objects: list<object>) doc "Identifies and returns the objects that count as roof tiles. A roof tile is characterized by having one dimension smaller than 0.02 and being red in color." {
    let roof_tiles = []
    for obj in objects {
        if get_object_color(obj) == "red" {
            let has_thin_side = false
            for dim in get_object_size(obj) {
                if dim < 0.02 {
                    has_thin_side = true
                }
            }
            if has_thin_side {
                roof_tiles = append(roof_tiles, obj)
            }
        }
    }
    return roof_tiles
}
'''

SOURCES["identify_beam_block"] = '''
skill identify_beam_block(blocks: list<object>) doc "Identifies the beam block from a list of blocks. A beam block is brown, has one square side (two side lengths the same), and its third side is at least 3 times as long as the square sides." {
    for block in blocks {
        if get_object_color(block) == "brown" {
            let size = get_object_size(block)
            let dims = sorted_by(size, size)
            if dims[0] == dims[1] and dims[2] >= 3 * dims[0] {
                return block
            }
        }
    }
}
'''

SOURCES["identify_roof_base"] = '''
skill identify_roof_base(objects: list<object>) doc "Identifies and returns the object that serves as the base for a roof. A roof base is brown in color and has two dimensions that are at least 10 times larger than the third dimension." {
    for obj in objects {
        if get_object_color(obj) == "brown" {
            let size = get_object_size(obj)
            let dims = sorted_by(size, size)
            if dims[0] * 10 <= dims[1] and dims[0] * 10 <= dims[2] {
                return obj
            }
        }
    }
}
'''

SOURCES["stack_blocks"] = '''
skill stack_blocks(blocks: list<object>, start_pose: pose) doc "Stacks a sequence of blocks on top of each other starting from a specified pose." {
    let all_blocks = get_objects()
    let cleared = false
    for block in all_blocks {
        let block_pose = get_object_pose(block)
        if not cleared and abs(block_pose.position.x - start_pose.position.x) < 0.05 and abs(block_pose.position.y - start_pose.position.y) < 0.05 and abs(block_pose.position.z - start_pose.position.z) < 0.05 {
            let top_left_position = workspace_back_left()
            put_first_on_second(block_pose, pose(top_left_position, rotation_from_euler_z(0)))
            cleared = true
        }
    }
    let current_pose = start_pose
    for block in blocks {
        let pick_pose = get_object_pose(block)
        put_first_on_second(pick_pose, current_pose)
        let block_size = get_object_size(block)
        current_pose = pose(point(current_pose.position.x, current_pose.position.y, current_pose.position.z + block_size[2]), current_pose.rotation)
    }
}
'''

SOURCES["move_block_next_to_reference"] = '''
skill move_block_next_to_reference(block: object, referenceBlock: object, axis: string = "x", gap: number = 0.005) doc "Moves the block next to the referenceBlock such that their edges are aligned along the specified axis with a small gap. The axis should be 'x', '-x', 'y', or '-y'." {
    if axis != "x" and axis != "-x" and axis != "y" and axis != "-y" {
        raise "Axis must be either 'x', '-x', 'y', or '-y'."
    }
    let block_pose = get_object_pose(block)
    let reference_pose = get_object_pose(referenceBlock)
    let reference_size = get_object_size(referenceBlock)
    let block_size = get_object_size(block)
    let offset = 0
    let direction = point(1, 0, 0)
    match axis {
        case "x" {
            offset = (reference_size[0] + block_size[0]) / 2 + gap
            direction = point(1, 0, 0)
        }
        case "-x" {
            offset = (reference_size[0] + block_size[0]) / 2 + gap
            direction = point(-1, 0, 0)
        }
        case "y" {
            offset = (reference_size[1] + block_size[1]) / 2 + gap
            direction = point(0, 1, 0)
        }
        case "-y" {
            offset = (reference_size[1] + block_size[1]) / 2 + gap
            direction = point(0, -1, 0)
        }
    }
    let new_position = point_at_distance_and_rotation(reference_pose.position, reference_pose.rotation, offset, direction)
    let new_pose = pose(new_position, reference_pose.rotation)
    put_first_on_second(block_pose, new_pose)
}
'''

SOURCES["make_line_of_blocks_next_to"] = '''
skill make_line_of_blocks_next_to(blocks: list<object>, referenceBlock: object, direction: string, gap: number = 0.005) doc "Arranges the given blocks in a straight line next to a reference block in the specified direction. Valid directions are 'front', 'back', 'left', and 'right'. The gap is left between the reference block and the first block, and between consecutive blocks." {
    let axis = ""
    match direction {
        case "front" {
            axis = "x"
        }
        case "back" {
            axis = "-x"
        }
        case "left" {
            axis = "-y"
        }
        case "right" {
            axis = "y"
        }
        else {
            raise "Invalid direction provided. Use 'front', 'back', 'left', or 'right'."
        }
    }
    let current_reference = referenceBlock
    for block in blocks {
        move_block_next_to_reference(block, current_reference, axis, gap)
        current_reference = block
    }
}
'''

SOURCES["make_line_with_blocks"] = '''
skill make_line_with_blocks(blocks: list<object>, start_pose: pose, gap: number = 0.005) doc "Arranges the given blocks in a straight line starting from the specified start pose. The position is used as the starting point and the rotation as the direction vector. The blocks are placed in the order in which they are passed." {
    let current_block = blocks[0]
    put_first_on_second(get_object_pose(current_block), start_pose)
    for block in blocks[1:] {
        move_block_next_to_reference(block, current_block, "x", gap)
        current_block = block
    }
}
'''

SOURCES["build_structure_from_blocks"] = '''
skill build_structure_from_blocks(blocks: list<object>, dimensions: list<number>, pose: pose, gap: number = 0.005) doc "Arranges the blocks to form a 3D structure of the given dimensions starting from the given pose, which specifies the position and orientation of the first block placed. Assumes the list of blocks contains enough blocks and that the blocks are homogeneous in size." {
    if len(dimensions) != 3 {
        raise "Dimensions should be a tuple of three integers."
    }
    let block_size = get_object_size(blocks[0])
    let block_index = 0
    for z in range(dimensions[2]) {
        let layer_blocks = blocks[block_index:block_index + dimensions[0] * dimensions[1]]
        let layer_start_position = point_at_distance_and_rotation(pose.position, pose.rotation, (block_size[2] + gap) * z, point(0, 0, 1))
        let layer_start_pose = pose(layer_start_position, pose.rotation)
        for y in range(dimensions[1]) {
            let row_blocks = layer_blocks[y * dimensions[0]:(y + 1) * dimensions[0]]
            let row_start_position = point_at_distance_and_rotation(layer_start_pose.position, layer_start_pose.rotation, (block_size[1] + gap) * y, point(0, 1, 0))
            let row_start_pose = pose(row_start_position, layer_start_pose.rotation)
            make_line_with_blocks(row_blocks, row_start_pose, gap)
        }
        block_index = block_index + dimensions[0] * dimensions[1]
    }
}
'''

SOURCES["place_roof_tiles"] = '''
skill place_roof_tiles(roof_tiles: list<object>, specific_pose: pose) doc "Places exactly six roof tiles starting from a specific pose. Arranges the roof tiles evenly from the specified starting position and orientation. The list of roof tiles must contain exactly six tiles." {
    if len(roof_tiles) != 6 {
        raise "There must be exactly six roof tiles"
    }
    let tile_width = roof_tiles[0].size[0]
    let relative_rotation = compose_rotations(specific_pose.rotation, rotation_from_euler_z(pi / 2))
    let adjusted_pose_left = pose(point(specific_pose.position.x, specific_pose.position.y - tile_width / 2, specific_pose.position.z), relative_rotation)
    put_first_on_second(get_object_pose(roof_tiles[0]), adjusted_pose_left)
    move_block_next_to_reference(roof_tiles[1], roof_tiles[0], "-y", 0.005)
    move_block_next_to_reference(roof_tiles[2], roof_tiles[0], "y", 0.005)
    move_block_next_to_reference(roof_tiles[3], roof_tiles[0], "x", 0.005)
    move_block_next_to_reference(roof_tiles[4], roof_tiles[3], "-y", 0.005)
    move_block_next_to_reference(roof_tiles[5], roof_tiles[3], "y", 0.005)
}
'''

SOURCES["assemble_roof"] = '''
skill assemble_roof(base: object, roof_beam: object, roof_tiles: list<object>, overall_pose: pose) doc "Assembles a roof structure using a designated base, a roof beam, and a list of roof tiles, starting from a given overall pose. The base acts as the foundation while the roof beam provides structural support and the roof tiles are placed on top to complete the structure." {
    put_first_on_second(get_object_pose(base), overall_pose)
    let base_pose = get_object_pose(base)
    let beam_pose = pose(point(base_pose.position.x, base_pose.position.y, base_pose.position.z + base.size[2] / 2 + roof_beam.size[2] / 2), base_pose.rotation)
    put_first_on_second(get_object_pose(roof_beam), beam_pose)
    beam_pose = get_object_pose(roof_beam)
    let roof_tiles_pose = pose(point(beam_pose.position.x, beam_pose.position.y, beam_pose.position.z + roof_beam.size[2] / 2 + 0.01), beam_pose.rotation)
    place_roof_tiles(roof_tiles, roof_tiles_pose)
}
'''

SOURCES["build_house_base"] = '''
skill build_house_base(blocks: list<object>, pose: pose) doc "Constructs the base of a house in the workspace using a list of block objects starting from a specified pose. Each block should have uniform attributes such as size and color. The pose gives the starting position and orientation from which to begin constructing the base of the house." {
    let block_width = get_object_size(blocks[0])[0]
    let startingPose = pose(point(pose.position.x + 1.5 * block_width, pose.position.y - block_width, pose.position.z), pose.rotation)
    stack_blocks(blocks[0:2], startingPose)
    let next_stack_position = point_at_distance_and_rotation(startingPose.position, startingPose.rotation, block_width * 2, point(0, 1, 0))
    stack_blocks(blocks[2:4], pose(next_stack_position, startingPose.rotation))
    make_line_of_blocks_next_to(blocks[4:6], blocks[0], "back")
    make_line_of_blocks_next_to(blocks[6:8], blocks[3], "back")
    let back_wall_start_pos = point_at_distance_and_rotation(get_object_pose(blocks[5]).position, startingPose.rotation, block_width + 0.005, point(-1, 0, 0))
    build_structure_from_blocks(blocks[8:14], [1, 3, 2], pose(back_wall_start_pos, startingPose.rotation))
}
'''

SOURCES["build_house"] = '''
skill build_house() doc "Builds a house in the middle of the workspace. Assumes all the necessary objects are available in the workspace, and moves them out of the way before building the house." {
    let objects = get_blocks_by_color()
    let base_blocks = get_blocks_by_color("yellow")
    if len(base_blocks) != 14 {
        raise "Not enough blocks to build the house"
    }
    let roof_base = identify_roof_base(objects)
    if not roof_base {
        raise "Can't find the roof base"
    }
    let roof_beam = identify_beam_block(objects)
    if not roof_beam {
        raise "Can't find the roof beam"
    }
    let roof_tiles = identify_roof_tiles(objects)
    if not roof_tiles {
        raise "Can't find the roof tiles"
    }
    let back_left = workspace_back_left()
    make_line_with_blocks(base_blocks, pose(back_left, rotation_from_euler_z(pi / 2)))
    let back_right = workspace_back_right()
    make_line_with_blocks(roof_tiles, pose(back_right, rotation_from_euler_z(0)))
    let front_left = workspace_front_left()
    put_first_on_second(get_object_pose(roof_beam), pose(front_left, rotation_from_euler_z(0)))
    let middle = workspace_middle()
    let front_middle = point(front_left.x, middle.y, 0)
    put_first_on_second(get_object_pose(roof_base), pose(front_middle, rotation_from_euler_z(0)))
    build_house_base(base_blocks, pose(middle, rotation_from_euler_z(0)))
    assemble_roof(roof_base, roof_beam, roof_tiles, pose(middle, rotation_from_euler_z(0)))
}
'''


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, source in SOURCES.items():
        program = parse(source)
        assert len(program.skills) == 1 and not program.statements, name
        assert program.skills[0].name == name, name
        canonical = format_program(program)
        assert parse(canonical) == program, name
        (OUT_DIR / f"{name}.skill").write_text(canonical, encoding="utf-8")
        print(f"wrote {name}.skill ({len(canonical)} bytes)")


if __name__ == "__main__":
    main()
