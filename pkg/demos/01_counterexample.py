# Two users collide and split into d = 3 groups.
#
# The early-stop receiver and the sum-over-all-groups recursion disagree as
# soon as the first group holds a single user: that user is decoded in slot 2,
# and cancelling it from the stored root collision hands over the other user.

from sicta import corrected_length, d_min, parse_tree, slot_level_cri, standard_ta_length, yg_length

for text in ["2(1,1,0)", "2(0,1,1)", "2(0,0,2(1,1,0))"]:
    tree = parse_tree(text, d=3)
    occ = [int(tree.occupancy[c]) for c in tree.children(0)]
    print(f"tree {text}")
    print(f"  groups visited (d_min) : {d_min(occ, tree.n)}")
    print(f"  early-stop recursion   : {corrected_length(tree)} slots")
    print(f"  sum over all groups    : {yg_length(tree)} slots")
    print(f"  no SIC at all          : {standard_ta_length(tree)} slots")
    print(f"  slot-level receiver    : {slot_level_cri(tree)}")
    print()

# With binary splitting the two recursions can never disagree: d_min is 1 or
# 2 and the second group is always obtained by cancellation.
tree = parse_tree("4(2(1,1),2(0,2(1,1)))", d=2)
print(tree, corrected_length(tree), yg_length(tree), slot_level_cri(tree).total_slots)
