// Reference PNGs produced by an external encoder (zlib); the first uses a
// fixed-huffman stream with filter types 0,1,2,3,4,1 on a 12x6 RGB image,
// the second a dynamic-huffman stream with cycling filters on 40x24.
#pragma once

#include <cstdint>
#include <vector>

namespace pngref {

inline const std::vector<uint8_t> kFixedHuffmanPng = {
    137,80,78,71,13,10,26,10,0,0,0,13,73,72,68,82,0,0,0,12,
    0,0,0,6,8,2,0,0,0,120,140,232,214,0,0,0,82,73,68,65,
    84,120,218,99,96,96,248,47,194,254,69,131,239,165,141,232,189,0,153,203,
    41,202,39,42,180,246,246,24,110,90,96,177,124,139,253,156,19,110,19,239,
    248,182,49,50,203,255,18,97,255,138,31,49,49,203,255,38,140,216,236,202,
    120,132,127,224,71,44,32,133,236,4,16,35,255,236,103,4,221,4,0,204,
    79,80,147,152,127,187,135,0,0,0,0,73,69,78,68,174,66,96,130
};

// pixel (y,x) channel values: r=(x*20+y*3)%256, g=(x*7+y*31)%256, b=(255-x*11-y*5)%256
inline uint8_t fixed_expected(int y, int x, int ch) {
  if (ch == 0) return static_cast<uint8_t>((x * 20 + y * 3) % 256);
  if (ch == 1) return static_cast<uint8_t>((x * 7 + y * 31) % 256);
  return static_cast<uint8_t>(((255 - x * 11 - y * 5) % 256 + 256) % 256);
}

inline const std::vector<uint8_t> kDynamicHuffmanPng = {
    137,80,78,71,13,10,26,10,0,0,0,13,73,72,68,82,0,0,0,40,
    0,0,0,24,8,2,0,0,0,7,230,40,151,0,0,8,145,73,68,65,
    84,120,218,117,85,127,112,20,245,29,189,240,118,221,124,239,242,217,203,229,
    123,151,221,203,229,146,108,46,199,93,216,156,33,132,24,227,5,99,12,33,
    198,24,43,162,173,66,83,75,65,83,28,108,173,84,43,35,142,99,132,194,
    168,141,1,50,52,26,20,219,16,64,44,218,10,90,177,234,168,1,193,226,
    15,20,127,52,198,212,73,195,153,38,8,34,17,226,185,220,92,239,54,156,
    69,105,255,121,243,230,237,155,55,223,207,204,231,243,214,98,177,88,210,68,
    8,214,243,152,157,101,58,51,220,110,123,81,94,86,153,207,117,73,80,157,
    27,242,44,158,145,183,188,82,235,168,46,122,162,54,176,103,206,180,161,166,
    144,229,170,233,218,181,229,179,231,95,176,228,134,170,142,197,213,187,151,212,
    28,254,197,165,142,101,245,151,220,121,217,175,238,110,218,220,118,101,255,234,
    185,153,15,94,211,184,246,71,43,55,204,127,181,187,197,242,248,79,107,123,
    23,173,220,126,211,27,79,47,201,220,181,244,250,221,191,220,252,242,109,95,
    246,221,158,70,222,180,52,3,136,67,52,32,77,128,25,176,197,65,97,216,
    39,224,48,192,227,112,25,80,38,224,14,195,19,135,215,64,254,4,52,3,
    190,56,252,6,2,149,40,54,160,199,17,50,80,58,129,50,3,229,53,168,
    48,80,57,129,42,3,225,56,102,25,168,169,68,173,129,186,56,234,13,52,
    76,160,209,64,83,28,205,97,76,33,47,40,0,114,131,124,32,63,40,31,
    164,129,6,64,131,160,17,80,63,104,24,20,73,233,30,124,199,159,208,63,
    5,13,157,229,255,94,142,231,156,156,73,191,7,200,185,72,146,36,33,61,
    87,96,118,193,106,17,108,30,33,35,83,160,58,65,174,22,236,165,66,102,
    145,224,8,8,89,23,10,188,71,112,238,23,92,3,66,246,30,65,217,39,
    168,159,8,238,119,132,28,139,224,49,132,220,227,130,119,88,200,59,45,228,
    127,33,20,44,22,52,73,40,84,5,31,132,162,116,193,239,17,182,204,22,
    2,1,33,88,45,20,151,10,219,11,4,61,44,148,76,23,118,244,8,2,
    121,165,180,24,64,16,99,144,210,193,8,182,152,249,58,17,148,32,71,77,
    20,205,9,18,132,64,233,41,18,51,167,161,148,109,210,175,165,252,214,148,
    109,240,44,127,36,69,124,176,212,174,117,95,218,153,91,223,157,127,249,99,
    133,115,87,249,231,175,9,222,248,144,126,219,51,231,223,187,187,108,221,139,
    51,123,123,42,95,216,114,209,187,59,102,141,29,188,68,252,168,174,240,227,
    57,181,175,54,254,108,207,21,171,14,252,96,251,219,87,191,123,242,218,111,
    190,190,206,31,95,112,245,191,126,114,239,232,194,103,62,95,28,225,173,57,
    217,55,207,245,222,114,191,229,214,189,210,178,41,214,59,106,203,150,183,205,
    92,177,55,124,143,245,226,182,185,254,85,143,4,215,68,74,31,152,113,117,
    123,218,149,79,21,37,39,142,154,19,187,193,98,176,69,147,207,180,71,225,
    136,129,187,225,138,65,137,194,221,2,79,20,222,24,242,221,208,98,240,69,
    225,143,33,208,143,226,24,244,40,66,94,148,70,81,22,67,249,245,168,136,
    161,50,138,42,47,194,81,204,138,161,166,31,181,49,212,69,81,31,67,131,
    27,141,49,52,69,209,220,146,92,46,34,31,157,65,63,145,199,196,5,68,
    45,68,139,82,120,35,81,55,81,175,137,143,18,245,164,48,66,52,144,194,
    65,162,225,115,114,60,231,228,44,56,147,134,240,125,65,41,139,165,219,24,
    115,50,171,155,217,172,44,131,51,250,132,201,163,204,126,130,101,26,204,241,
    21,203,26,101,235,191,97,78,206,92,25,44,219,205,148,44,166,218,152,219,
    201,114,250,89,247,24,203,29,103,222,211,44,111,148,229,159,96,5,6,211,
    156,172,144,49,95,14,43,226,172,55,131,77,237,103,129,19,44,120,132,61,
    241,21,155,22,101,250,24,43,25,103,161,211,44,177,92,142,228,29,219,205,
    59,150,192,108,230,29,219,64,18,200,0,217,77,148,224,78,40,255,75,47,
    158,212,143,167,116,175,137,57,166,51,161,23,128,102,124,199,79,169,28,75,
    91,225,226,251,2,173,191,13,222,252,64,232,150,117,23,220,218,29,94,182,
    165,250,142,157,105,203,95,179,174,56,100,191,231,179,204,54,195,181,42,43,
    111,141,190,232,129,57,139,219,23,45,89,219,118,91,103,207,111,126,255,250,
    157,143,28,185,251,209,172,57,143,135,155,122,110,186,98,203,250,185,79,188,
    54,255,79,227,55,60,61,245,241,103,22,244,62,187,238,169,231,15,236,252,
    219,121,187,94,174,219,253,106,91,219,158,190,213,251,206,91,243,247,166,223,
    189,181,110,195,193,129,238,67,83,55,126,184,108,168,63,237,161,154,229,201,
    137,13,115,98,195,108,46,35,249,58,187,97,54,151,97,54,151,1,247,93,
    240,24,102,115,25,102,115,25,102,115,25,102,115,25,102,115,25,102,115,221,
    101,54,151,97,54,151,97,54,151,97,54,151,97,54,151,97,54,151,129,230,
    187,146,203,165,80,190,66,154,66,62,229,191,124,145,66,45,10,221,160,208,
    194,20,223,164,208,31,20,234,81,232,209,179,248,160,66,159,42,52,164,208,
    112,138,127,47,199,119,78,206,36,239,81,176,160,105,161,196,229,116,171,204,
    184,108,149,101,155,36,103,100,203,52,34,203,99,178,125,92,238,24,147,29,
    227,114,214,49,153,75,178,51,91,118,73,114,182,85,86,184,172,90,229,135,
    185,156,115,76,246,140,200,185,167,100,239,136,156,55,38,111,26,151,11,238,
    151,53,46,23,202,178,79,146,55,103,183,251,165,246,169,99,237,129,241,246,
    109,99,237,197,227,237,211,142,181,235,35,237,37,167,228,144,36,39,150,203,
    147,188,99,102,222,241,40,88,161,121,199,33,16,75,86,12,31,53,139,134,
    153,74,212,236,157,111,149,4,22,155,74,212,108,174,73,197,157,250,122,212,
    115,198,95,124,150,127,52,229,15,193,210,183,115,104,207,115,135,247,237,30,
    121,243,197,177,67,91,143,126,178,253,248,200,142,241,175,58,78,161,59,234,
    124,236,116,224,222,120,245,202,41,243,30,18,151,158,72,95,125,210,182,249,
    107,185,111,216,113,248,51,167,52,170,148,124,158,51,239,35,239,138,143,11,
    182,14,250,222,127,101,42,14,20,207,124,187,164,181,172,116,227,204,25,135,
    106,42,50,10,47,108,240,135,87,6,47,238,227,181,66,246,236,6,119,195,
    131,185,151,31,146,154,115,173,87,181,210,188,93,183,254,48,237,224,193,228,
    255,24,34,68,17,82,4,76,132,77,76,254,94,236,34,28,34,120,4,46,
    17,138,8,119,47,60,34,188,34,242,35,208,68,248,68,248,69,4,252,40,
    22,161,139,8,69,80,42,162,76,68,121,47,42,68,84,138,168,138,32,44,
    98,150,136,26,63,106,69,212,137,168,23,209,16,65,163,136,38,17,205,189,
    201,229,210,136,107,68,26,65,163,10,141,116,141,252,26,13,104,244,150,70,
    125,26,197,52,26,215,40,162,145,71,35,151,70,54,141,102,105,84,174,81,
    72,35,159,70,31,104,116,64,163,189,26,25,26,29,213,104,88,59,147,38,
    106,20,78,165,13,106,116,40,149,118,82,163,35,103,210,176,162,115,166,180,
    129,167,175,226,172,147,91,55,113,219,253,60,99,45,167,231,185,252,36,183,
    63,199,51,159,229,142,93,60,235,105,206,63,230,206,119,185,107,63,207,30,
    224,202,135,92,221,203,221,239,243,156,56,247,140,241,220,47,185,247,107,254,
    216,17,158,127,138,23,184,184,230,228,133,118,222,147,195,139,28,220,159,206,
    167,134,249,214,11,120,208,207,139,103,242,105,53,252,201,105,188,164,140,135,
    174,227,137,229,242,39,239,56,207,188,99,91,178,107,146,119,124,192,172,152,
    4,57,102,98,130,79,55,73,65,74,207,51,241,91,219,113,148,78,146,243,
    207,248,171,108,41,255,129,84,130,153,214,56,73,166,195,34,204,238,16,107,
    215,167,95,185,129,154,30,118,94,181,209,219,178,41,56,255,143,21,173,189,
    179,151,110,187,118,201,147,63,191,227,169,187,151,253,165,243,206,93,59,196,
    191,238,159,242,66,196,254,146,224,124,197,239,232,187,44,239,245,91,60,111,
    116,22,188,249,82,232,157,127,79,123,207,85,249,193,236,234,127,220,94,53,
    176,237,245,127,14,246,13,57,247,31,110,254,96,100,205,123,99,123,63,61,
    42,28,62,94,63,52,190,230,216,169,183,142,68,157,199,79,183,196,226,219,
    190,153,114,114,181,152,230,88,184,59,13,128,148,88,47,179,171,1,91,162,
    81,251,96,151,224,0,184,4,23,160,36,186,186,15,30,9,94,32,95,130,
    6,248,36,248,129,192,62,20,3,186,132,16,80,42,161,12,40,223,135,10,
    160,82,66,21,16,150,48,11,168,217,135,90,160,78,66,61,208,32,161,17,
    104,146,208,220,151,92,46,157,20,157,152,78,208,233,164,78,95,232,52,164,
    147,71,39,210,73,210,41,170,211,184,78,17,157,242,117,114,232,100,211,41,
    166,211,132,78,163,58,13,235,228,210,201,174,83,154,78,134,78,71,117,26,
    209,201,173,19,215,73,212,41,174,211,151,58,29,209,255,95,62,114,127,188,
    73,226,93,233,233,93,140,119,89,51,187,108,82,87,134,179,139,26,186,228,
    146,46,123,121,87,102,80,117,148,171,89,211,85,222,170,58,175,81,93,13,
    106,246,21,170,50,79,85,47,83,221,243,212,156,14,213,211,170,110,252,181,
    234,109,85,243,150,170,249,203,212,130,160,170,173,87,11,59,84,223,106,181,
    168,83,245,175,86,183,188,169,6,118,170,193,109,106,241,78,117,251,159,85,
    125,171,90,178,75,221,49,162,254,7,126,204,14,206,124,177,104,186,0,0,
    0,0,73,69,78,68,174,66,96,130
};

// r=(x*x+y*13)%256, g=(x*5 ^ y*29)%256, b=(x*3+y*y)%256
inline uint8_t dynamic_expected(int y, int x, int ch) {
  if (ch == 0) return static_cast<uint8_t>((x * x + y * 13) % 256);
  if (ch == 1) return static_cast<uint8_t>(((x * 5) ^ (y * 29)) % 256);
  return static_cast<uint8_t>((x * 3 + y * y) % 256);
}

}  // namespace pngref
