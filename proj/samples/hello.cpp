#include <runtime.h>

/*templet$$include*/
#include <iostream>
/*end*/

/*templet*
 *hello<function>.
*end*/

void hello(){
/*templet$hello$*/
std::cout << "hello world!!!";
/*end*/
}
